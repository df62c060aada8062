//! Gaussian rationals (complex numbers with rational parts) and dense
//! polynomial arithmetic over them. This is the substrate for number-field
//! reduction and inversion.

use num_traits::{One, Zero};

use crate::rat::Rat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussRat {
    pub re: Rat,
    pub im: Rat,
}

impl GaussRat {
    pub fn zero() -> Self {
        GaussRat { re: Rat::zero(), im: Rat::zero() }
    }

    pub fn one() -> Self {
        GaussRat { re: Rat::one(), im: Rat::zero() }
    }

    pub fn i() -> Self {
        GaussRat { re: Rat::zero(), im: Rat::one() }
    }

    pub fn from_rat(r: Rat) -> Self {
        GaussRat { re: r, im: Rat::zero() }
    }

    pub fn new(re: Rat, im: Rat) -> Self {
        GaussRat { re, im }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        GaussRat { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn sub(&self, o: &Self) -> Self {
        GaussRat { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    pub fn neg(&self) -> Self {
        GaussRat { re: -self.re.clone(), im: -self.im.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Self {
        let n = self.norm();
        assert!(!n.is_zero(), "GaussRat inverse of zero");
        GaussRat { re: &self.re / &n, im: -(&self.im / &n) }
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.inv())
    }

    pub fn scale(&self, r: &Rat) -> Self {
        GaussRat { re: &self.re * r, im: &self.im * r }
    }
}

/// Dense polynomial over GaussRat; index = degree. Invariant: no trailing
/// zero coefficients (the zero polynomial is the empty vector).
pub type GPoly = Vec<GaussRat>;

pub fn gp_trim(mut p: GPoly) -> GPoly {
    while p.last().map_or(false, GaussRat::is_zero) {
        p.pop();
    }
    p
}

pub fn gp_deg(p: &GPoly) -> Option<usize> {
    if p.is_empty() {
        None
    } else {
        Some(p.len() - 1)
    }
}

pub fn gp_from_rats(coeffs: &[Rat]) -> GPoly {
    gp_trim(coeffs.iter().map(|c| GaussRat::from_rat(c.clone())).collect())
}

pub fn gp_add(a: &GPoly, b: &GPoly) -> GPoly {
    let mut out = vec![GaussRat::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] = out[i].add(c);
    }
    for (i, c) in b.iter().enumerate() {
        out[i] = out[i].add(c);
    }
    gp_trim(out)
}

pub fn gp_sub(a: &GPoly, b: &GPoly) -> GPoly {
    gp_add(a, &b.iter().map(GaussRat::neg).collect())
}

pub fn gp_mul(a: &GPoly, b: &GPoly) -> GPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![GaussRat::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&ca.mul(cb));
        }
    }
    gp_trim(out)
}

pub fn gp_scale(a: &GPoly, c: &GaussRat) -> GPoly {
    gp_trim(a.iter().map(|x| x.mul(c)).collect())
}

/// Euclidean division: returns (quotient, remainder).
pub fn gp_divmod(a: &GPoly, b: &GPoly) -> (GPoly, GPoly) {
    assert!(!b.is_empty(), "polynomial division by zero");
    let db = b.len() - 1;
    let lead_inv = b[db].inv();
    let mut rem = a.clone();
    let mut quot = vec![GaussRat::zero(); a.len().saturating_sub(db)];
    while rem.len() > db {
        let dr = rem.len() - 1;
        let f = rem[dr].mul(&lead_inv);
        quot[dr - db] = f.clone();
        for j in 0..=db {
            let t = b[j].mul(&f);
            rem[dr - db + j] = rem[dr - db + j].sub(&t);
        }
        rem = gp_trim(rem);
        if rem.len() <= db {
            break;
        }
    }
    (gp_trim(quot), gp_trim(rem))
}

/// Extended gcd: (g, s, t) with s*a + t*b = g, g monic (or zero).
pub fn gp_xgcd(a: &GPoly, b: &GPoly) -> (GPoly, GPoly, GPoly) {
    let mut r0 = a.clone();
    let mut r1 = b.clone();
    let mut s0: GPoly = vec![GaussRat::one()];
    let mut s1: GPoly = Vec::new();
    let mut t0: GPoly = Vec::new();
    let mut t1: GPoly = vec![GaussRat::one()];
    while !r1.is_empty() {
        let (q, r) = gp_divmod(&r0, &r1);
        let ns = gp_sub(&s0, &gp_mul(&q, &s1));
        let nt = gp_sub(&t0, &gp_mul(&q, &t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = ns;
        t0 = t1;
        t1 = nt;
    }
    if let Some(lead) = r0.last().cloned() {
        let li = lead.inv();
        r0 = gp_scale(&r0, &li);
        s0 = gp_scale(&s0, &li);
        t0 = gp_scale(&t0, &li);
    }
    (r0, s0, t0)
}

pub fn gp_derivative(p: &GPoly) -> GPoly {
    if p.len() <= 1 {
        return Vec::new();
    }
    gp_trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.scale(&Rat::from_integer(num_bigint::BigInt::from(k))))
            .collect(),
    )
}

pub fn gp_eval(p: &GPoly, x: &GaussRat) -> GaussRat {
    let mut acc = GaussRat::zero();
    for c in p.iter().rev() {
        acc = acc.mul(x).add(c);
    }
    acc
}
