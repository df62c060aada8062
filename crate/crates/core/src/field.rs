//! Number fields Q(i)(theta) with a designated complex embedding, and
//! exact arithmetic on their elements.
//!
//! A field is described by a monic irreducible minimal polynomial over Q
//! for the generator theta, a flag for whether i is adjoined, and an
//! isolating disk that picks one complex root as the embedding of theta.
//! Elements are coordinate vectors over the power basis 1, theta, ...,
//! theta^(d-1) with Gaussian-rational entries.
//!
//! Irreducibility is certified, not assumed: candidate factors are
//! reconstructed from rigorously enclosed roots and checked by exact
//! division, so a polynomial is accepted only when no monic integer
//! (or Gaussian-integer) factor exists.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::sync::Arc;

use crate::cbig::{CBig, CRatBall, DyFloat, Round};
use crate::error::Error;
use crate::gauss::{
    gp_derivative, gp_divmod, gp_eval, gp_from_rats, gp_trim, gp_xgcd, GPoly, GaussRat,
};
use crate::rat::{fmt_rat, integralize_radical, nth_power_decompose, nth_root_exact, pow_rat, Rat};

pub type FieldRef = Arc<NumberField>;

/// Isolating approximation for a complex algebraic number.
#[derive(Clone, Debug)]
pub struct IsolatingDisk {
    pub re: Rat,
    pub im: Rat,
    pub radius: Rat,
}

#[derive(Clone, Debug)]
pub enum GeneratorKind {
    /// Degree-1 field: theta = 0, elements are Gaussian rationals.
    Rational,
    /// theta^n = base (signed n-th-power-free rational); embedding is a
    /// designated n-th root of base.
    Binomial { n: u32, base: Rat },
    /// Anything else with a certified-irreducible minimal polynomial.
    General,
}

#[derive(Debug)]
pub struct NumberField {
    /// Monic minimal polynomial of theta over Q, low-to-high, length d+1.
    pub minpoly: Vec<Rat>,
    pub adjoin_i: bool,
    pub embedding: IsolatingDisk,
    pub kind: GeneratorKind,
    /// theta^(d+j) over the power basis, for j = 0..d-1 (rational rows).
    reduction: Vec<Vec<Rat>>,
    /// Rational lower bound on the pairwise distance of distinct roots.
    separation: Rat,
}

impl NumberField {
    pub fn degree(&self) -> usize {
        self.minpoly.len() - 1
    }

    pub fn is_rational(&self) -> bool {
        self.degree() == 1
    }

    /// The rational field Q (optionally with i adjoined).
    pub fn rationals(adjoin_i: bool) -> FieldRef {
        Arc::new(NumberField {
            minpoly: vec![Rat::zero(), Rat::one()],
            adjoin_i,
            embedding: IsolatingDisk { re: Rat::zero(), im: Rat::zero(), radius: Rat::zero() },
            kind: GeneratorKind::Rational,
            reduction: Vec::new(),
            separation: Rat::one(),
        })
    }

    /// Adjoin a root of a monic polynomial over Q to the rationals.
    ///
    /// Rejects reducible and non-squarefree inputs; the approximation must
    /// isolate exactly one root.
    pub fn adjoin(minpoly: Vec<Rat>, approx: IsolatingDisk, adjoin_i: bool) -> Result<FieldRef, Error> {
        if minpoly.len() < 2 {
            return Err(Error::Precondition("minimal polynomial must have degree >= 1".into()));
        }
        if minpoly.last() != Some(&Rat::one()) {
            return Err(Error::Precondition("minimal polynomial must be monic".into()));
        }
        let d = minpoly.len() - 1;
        if d == 1 {
            // theta rational: only theta = -c allowed, and then the field is Q
            return Err(Error::Precondition(
                "degree-1 generator is the rational field; use NumberField::rationals".into(),
            ));
        }
        let gp = gp_from_rats(&minpoly);
        // squarefree check
        let (g, _, _) = gp_xgcd(&gp, &gp_derivative(&gp));
        if g.len() > 1 {
            return Err(Error::Precondition("minimal polynomial is not squarefree".into()));
        }
        // certified irreducibility over Q (or Q(i) when i is adjoined)
        if let Some(factor) = find_monic_factor(&minpoly, adjoin_i)? {
            return Err(Error::ReduciblePolynomial { factor });
        }
        let roots = enclose_roots(&gp)?;
        let separation = root_separation(&roots);
        // identify the designated root
        let mut hits = Vec::new();
        for (i, r) in roots.iter().enumerate() {
            let dist = (&r.re - &approx.re).abs() + (&r.im - &approx.im).abs();
            if dist <= &approx.radius + &r.rad {
                hits.push(i);
            }
        }
        if hits.len() != 1 {
            return Err(Error::NonIsolating(format!(
                "approximation disk touches {} enclosed roots",
                hits.len()
            )));
        }
        let chosen = roots[hits[0]].clone();
        let reduction = reduction_rows(&minpoly);
        Ok(Arc::new(NumberField {
            minpoly,
            adjoin_i,
            embedding: IsolatingDisk { re: chosen.re.clone(), im: chosen.im.clone(), radius: chosen.rad.clone() },
            kind: GeneratorKind::General,
            reduction,
            separation,
        }))
    }

    /// Field Q(i?)(base^(1/n)) for a signed n-th-power-free rational base,
    /// with the principal root as embedding.
    pub fn binomial(n: u32, base: Rat, adjoin_i: bool) -> Result<FieldRef, Error> {
        assert!(n >= 2);
        if base.is_zero() || base.is_one() {
            return Err(Error::Precondition("binomial base must not be 0 or 1".into()));
        }
        let mut minpoly = vec![Rat::zero(); n as usize + 1];
        minpoly[0] = -base.clone();
        minpoly[n as usize] = Rat::one();
        let gp = gp_from_rats(&minpoly);
        if let Some(factor) = find_monic_factor(&minpoly, adjoin_i)? {
            return Err(Error::ReduciblePolynomial { factor });
        }
        let roots = enclose_roots(&gp)?;
        let separation = root_separation(&roots);
        // principal root: argument in (-pi/n, pi/n]; for positive base the
        // positive real root, for negative base modulus^(1/n) e^(i pi / n).
        let target = principal_root_approx(&base, n);
        let mut best = 0usize;
        let mut best_d: Option<Rat> = None;
        for (i, r) in roots.iter().enumerate() {
            let dist = (&r.re - &target.0).abs() + (&r.im - &target.1).abs();
            if best_d.as_ref().map_or(true, |b| &dist < b) {
                best = i;
                best_d = Some(dist);
            }
        }
        let chosen = roots[best].clone();
        let ok_dist = best_d.unwrap() < &separation / Rat::from_integer(BigInt::from(2));
        if !ok_dist {
            return Err(Error::NonIsolating("principal-root approximation ambiguous".into()));
        }
        let reduction = reduction_rows(&minpoly);
        Ok(Arc::new(NumberField {
            minpoly,
            adjoin_i,
            embedding: IsolatingDisk { re: chosen.re.clone(), im: chosen.im.clone(), radius: chosen.rad.clone() },
            kind: GeneratorKind::Binomial { n, base },
            reduction,
            separation,
        }))
    }

    /// Rigorous enclosure of theta, refined until the radius is below
    /// 2^-prec times max(1, |theta|).
    pub fn theta_enclosure(&self, prec: u32) -> CRatBall {
        if self.is_rational() {
            return CRatBall::exact(Rat::zero(), Rat::zero());
        }
        let target_exp = prec as i64 + 2;
        let mut center = CBig::from_rats(&self.embedding.re, &self.embedding.im, 64 + 2 * prec);
        let gp = gp_from_rats(&self.minpoly);
        let dgp = gp_derivative(&gp);
        let deg = Rat::from_integer(BigInt::from(self.degree()));
        let mut guard = 0;
        loop {
            guard += 1;
            assert!(guard < 200, "theta refinement failed to converge");
            // certified radius at the current dyadic center
            let z = GaussRat::new(center.re.to_rat(), center.im.to_rat());
            let pv = gp_eval(&gp, &z);
            let dv = gp_eval(&dgp, &z);
            if !dv.is_zero() {
                let eta = crate::cbig::sqrt_upper_rat(&pv.norm())
                    / crate::cbig::sqrt_lower_rat_nonzero(&dv.norm());
                let rad = &deg * &eta;
                let scale = z.re.abs() + z.im.abs() + Rat::one();
                if &rad * pow_rat(&Rat::from_integer(BigInt::from(2)), target_exp) <= scale {
                    // stays within the isolating region by construction
                    return CRatBall { re: z.re, im: z.im, rad };
                }
            }
            // Newton step at doubled precision
            let prec2 = center.prec * 2;
            let cz = CBig { re: center.re.clone(), im: center.im.clone(), prec: prec2 };
            let p = eval_cbig(&gp, &cz);
            let dp = eval_cbig(&dgp, &cz);
            center = cz.sub(&p.div(&dp));
        }
    }
}

fn eval_cbig(p: &GPoly, z: &CBig) -> CBig {
    let mut acc = CBig::zero(z.prec);
    for c in p.iter().rev() {
        acc = acc.mul(z);
        acc = acc.add(&CBig::from_rats(&c.re, &c.im, z.prec));
    }
    acc
}

fn principal_root_approx(base: &Rat, n: u32) -> (Rat, Rat) {
    let mag = base.abs();
    let root = DyFloat::from_rat(&mag, 96, Round::Nearest);
    // |base|^(1/n) via two square roots when n = 4, one when n = 2, else f64
    let m = match n {
        2 => root.sqrt(96, Round::Nearest),
        4 => root.sqrt(96, Round::Nearest).sqrt(96, Round::Nearest),
        _ => {
            let f = root.to_f64().powf(1.0 / n as f64);
            DyFloat::from_rat(&Rat::from_float(f).unwrap_or_else(Rat::zero), 96, Round::Nearest)
        }
    };
    let m = m.to_rat();
    if base.is_negative() {
        // principal root of a negative real: modulus^(1/n) * e^(i pi / n)
        let (c, s) = cos_sin_pi_over(n);
        (&m * &c, &m * &s)
    } else {
        (m, Rat::zero())
    }
}

fn cos_sin_pi_over(n: u32) -> (Rat, Rat) {
    // rational approximations of cos(pi/n), sin(pi/n); only used to pick
    // the nearest enclosed root, so modest accuracy suffices
    let a = std::f64::consts::PI / n as f64;
    (
        Rat::from_float(a.cos()).unwrap_or_else(Rat::zero),
        Rat::from_float(a.sin()).unwrap_or_else(Rat::zero),
    )
}

fn reduction_rows(minpoly: &[Rat]) -> Vec<Vec<Rat>> {
    let d = minpoly.len() - 1;
    // rows[j] = coordinates of theta^(d+j), for j = 0..d-2
    let base: Vec<Rat> = minpoly[..d].iter().map(|c| -c.clone()).collect();
    let mut rows: Vec<Vec<Rat>> = vec![base.clone()];
    for _ in 1..d.saturating_sub(1) {
        let cur = rows.last().unwrap().clone();
        // multiply by theta: shift, then fold the theta^d overflow
        let top = cur[d - 1].clone();
        let mut next = vec![Rat::zero(); d];
        for k in (1..d).rev() {
            next[k] = cur[k - 1].clone();
        }
        for k in 0..d {
            next[k] += &top * &base[k];
        }
        rows.push(next);
    }
    rows
}

/// An exact element of a number field: coordinates over the power basis.
#[derive(Clone, Debug)]
pub struct AlgScalar {
    pub field: FieldRef,
    pub coords: Vec<GaussRat>,
}

impl AlgScalar {
    pub fn zero(field: &FieldRef) -> Self {
        AlgScalar { field: field.clone(), coords: vec![GaussRat::zero(); field.degree()] }
    }

    pub fn one(field: &FieldRef) -> Self {
        Self::from_gauss(field, GaussRat::one())
    }

    pub fn from_rat(field: &FieldRef, r: Rat) -> Self {
        Self::from_gauss(field, GaussRat::from_rat(r))
    }

    pub fn from_gauss(field: &FieldRef, g: GaussRat) -> Self {
        assert!(field.adjoin_i || g.is_real(), "imaginary part in a field without i");
        let mut coords = vec![GaussRat::zero(); field.degree()];
        coords[0] = g;
        AlgScalar { field: field.clone(), coords }
    }

    /// theta as an element (degree must be >= 2).
    pub fn generator(field: &FieldRef) -> Self {
        let mut coords = vec![GaussRat::zero(); field.degree()];
        if coords.len() >= 2 {
            coords[1] = GaussRat::one();
        }
        AlgScalar { field: field.clone(), coords }
    }

    pub fn i(field: &FieldRef) -> Result<Self, Error> {
        if !field.adjoin_i {
            return Err(Error::FieldMismatch("i is not adjoined".into()));
        }
        Ok(Self::from_gauss(field, GaussRat::i()))
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(GaussRat::is_zero)
    }

    pub fn is_gauss_rational(&self) -> bool {
        self.coords.iter().skip(1).all(GaussRat::is_zero)
    }

    pub fn as_gauss_rational(&self) -> Option<GaussRat> {
        if self.is_gauss_rational() {
            Some(self.coords[0].clone())
        } else {
            None
        }
    }

    pub fn as_rat(&self) -> Option<Rat> {
        self.as_gauss_rational().and_then(|g| if g.is_real() { Some(g.re) } else { None })
    }

    fn same_field(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.field, &o.field) || fields_equal(&self.field, &o.field)
    }

    /// Lift the pair into a common field: Gaussian-rational values embed
    /// anywhere, otherwise the fields must agree.
    fn coerced(
        a: &AlgScalar,
        b: &AlgScalar,
    ) -> Result<(AlgScalar, AlgScalar), Error> {
        if a.same_field(b) {
            return Ok((a.clone(), b.clone()));
        }
        if let Some(g) = a.as_gauss_rational() {
            if g.is_real() || b.field.adjoin_i {
                return Ok((AlgScalar::from_gauss(&b.field, g), b.clone()));
            }
        }
        if let Some(g) = b.as_gauss_rational() {
            if g.is_real() || a.field.adjoin_i {
                return Ok((a.clone(), AlgScalar::from_gauss(&a.field, g)));
            }
        }
        Err(Error::FieldMismatch(format!(
            "minpoly {:?} vs {:?}",
            a.field.minpoly.iter().map(fmt_rat).collect::<Vec<_>>(),
            b.field.minpoly.iter().map(fmt_rat).collect::<Vec<_>>()
        )))
    }

    pub fn add(&self, o: &Self) -> Result<Self, Error> {
        let (a, b) = Self::coerced(self, o)?;
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| x.add(y))
            .collect();
        Ok(AlgScalar { field: a.field, coords })
    }

    pub fn sub(&self, o: &Self) -> Result<Self, Error> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        AlgScalar { field: self.field.clone(), coords: self.coords.iter().map(GaussRat::neg).collect() }
    }

    pub fn mul(&self, o: &Self) -> Result<Self, Error> {
        let (a, b) = Self::coerced(self, o)?;
        let d = a.field.degree();
        if d == 1 {
            return Ok(AlgScalar { field: a.field.clone(), coords: vec![a.coords[0].mul(&b.coords[0])] });
        }
        // raw product of coordinate polynomials, degree <= 2d-2
        let mut raw = vec![GaussRat::zero(); 2 * d - 1];
        for (i, ca) in a.coords.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (j, cb) in b.coords.iter().enumerate() {
                raw[i + j] = raw[i + j].add(&ca.mul(cb));
            }
        }
        // reduce theta^(d+j) via the cached rows
        let mut coords: Vec<GaussRat> = raw[..d].to_vec();
        for j in 0..(d - 1) {
            let c = &raw[d + j];
            if c.is_zero() {
                continue;
            }
            for k in 0..d {
                let t = c.scale(&a.field.reduction[j][k]);
                coords[k] = coords[k].add(&t);
            }
        }
        Ok(AlgScalar { field: a.field, coords })
    }

    pub fn scale_rat(&self, r: &Rat) -> Self {
        AlgScalar {
            field: self.field.clone(),
            coords: self.coords.iter().map(|c| c.scale(r)).collect(),
        }
    }

    pub fn mul_i(&self) -> Result<Self, Error> {
        if !self.field.adjoin_i {
            return Err(Error::FieldMismatch("i is not adjoined".into()));
        }
        Ok(AlgScalar {
            field: self.field.clone(),
            coords: self.coords.iter().map(|c| c.mul(&GaussRat::i())).collect(),
        })
    }

    pub fn inv(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(g) = self.as_gauss_rational() {
            return Ok(AlgScalar::from_gauss(&self.field, g.inv()));
        }
        let mp = gp_from_rats(&self.field.minpoly);
        let me = gp_trim(self.coords.clone());
        let (g, s, _) = gp_xgcd(&me, &mp);
        if g.len() != 1 {
            return Err(Error::FieldMismatch(
                "minimal polynomial not irreducible over Q(i): inverse does not exist".into(),
            ));
        }
        // s / g is the inverse of `me` mod mp; g is monic so g = 1
        let mut coords = s;
        coords.resize(self.field.degree(), GaussRat::zero());
        Ok(AlgScalar { field: self.field.clone(), coords })
    }

    pub fn div(&self, o: &Self) -> Result<Self, Error> {
        let (a, b) = Self::coerced(self, o)?;
        a.mul(&b.inv()?)
    }

    pub fn pow(&self, k: u32) -> Result<Self, Error> {
        let mut acc = AlgScalar::one(&self.field);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            base = base.mul(&base)?;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn eq(&self, o: &Self) -> bool {
        match Self::coerced(self, o) {
            Ok((a, b)) => a.coords == b.coords,
            Err(_) => false,
        }
    }

    /// Rigorous complex enclosure at roughly 2^-prec relative accuracy.
    pub fn embed_ball(&self, prec: u32) -> CRatBall {
        let mut p = prec;
        loop {
            let th = self.field.theta_enclosure(p);
            let mut acc = CRatBall::exact(Rat::zero(), Rat::zero());
            for c in self.coords.iter().rev() {
                acc = acc.mul(&th);
                acc = acc.add(&CRatBall::exact(c.re.clone(), c.im.clone()));
            }
            let scale = acc.re.abs() + acc.im.abs() + &acc.rad;
            let ok = if scale.is_zero() {
                true
            } else {
                &acc.rad * pow_rat(&Rat::from_integer(BigInt::from(2)), prec as i64 + 1) <= scale
            };
            if ok {
                return acc;
            }
            p *= 2;
            assert!(p < 1 << 20, "embedding refinement runaway");
        }
    }

    /// Complex floating approximation with relative error <= 2^(1-prec).
    pub fn embed(&self, prec: u32) -> CBig {
        let ball = self.embed_ball(prec + 8);
        CBig::from_rats(&ball.re, &ball.im, prec)
    }

    /// Rigorous rational upper bound on |self|.
    pub fn abs_upper(&self, prec: u32) -> Rat {
        self.embed_ball(prec).abs_upper()
    }
}

/// Structural field equality: same minimal polynomial, same i-flag, and the
/// isolating disks designate the same root.
pub fn fields_equal(a: &FieldRef, b: &FieldRef) -> bool {
    if a.minpoly != b.minpoly || a.adjoin_i != b.adjoin_i {
        return false;
    }
    if a.is_rational() {
        return true;
    }
    let quarter = &a.separation / Rat::from_integer(BigInt::from(4));
    let ea = a.theta_enclosure(16);
    let eb = b.theta_enclosure(16);
    let mut ra = ea;
    let mut rb = eb;
    let mut bits = 16;
    while &ra.rad + &rb.rad > quarter && bits < 4096 {
        bits *= 2;
        ra = a.theta_enclosure(bits);
        rb = b.theta_enclosure(bits);
    }
    let dist = (&ra.re - &rb.re).abs() + (&ra.im - &rb.im).abs();
    dist + &ra.rad + &rb.rad < &a.separation / Rat::from_integer(BigInt::from(2))
}

/// Spec operation: exact field arithmetic dispatch.
pub fn alg_arith(a: &AlgScalar, b: &AlgScalar, op: char) -> Result<AlgScalar, Error> {
    match op {
        '+' => a.add(b),
        '-' => a.sub(b),
        '*' => a.mul(b),
        '/' => a.div(b),
        _ => Err(Error::Precondition(format!("unknown op {op:?}"))),
    }
}

/// A homomorphism between fields, given by the image of the source
/// generator. Applies to scalars coordinate-wise.
#[derive(Clone, Debug)]
pub struct FieldMap {
    pub from: FieldRef,
    pub to: FieldRef,
    pub theta_image: AlgScalar,
}

impl FieldMap {
    pub fn identity(field: &FieldRef) -> Self {
        FieldMap { from: field.clone(), to: field.clone(), theta_image: AlgScalar::generator(field) }
    }

    pub fn apply(&self, a: &AlgScalar) -> Result<AlgScalar, Error> {
        let mut acc = AlgScalar::zero(&self.to);
        for c in a.coords.iter().rev() {
            acc = acc.mul(&self.theta_image)?;
            if !(self.to.adjoin_i || c.is_real()) {
                return Err(Error::FieldMismatch("target field lacks i".into()));
            }
            acc = acc.add(&AlgScalar::from_gauss(&self.to, c.clone()))?;
        }
        Ok(acc)
    }

    /// Verified construction: checks that the image satisfies the source
    /// minimal polynomial.
    pub fn new(from: &FieldRef, to: &FieldRef, theta_image: AlgScalar) -> Result<Self, Error> {
        let mut acc = AlgScalar::zero(to);
        for c in from.minpoly.iter().rev() {
            acc = acc.mul(&theta_image)?;
            acc = acc.add(&AlgScalar::from_rat(to, c.clone()))?;
        }
        if !acc.is_zero() {
            return Err(Error::FieldMismatch("claimed image does not satisfy the minimal polynomial".into()));
        }
        Ok(FieldMap { from: from.clone(), to: to.clone(), theta_image })
    }
}

// ---------------------------------------------------------------------------
// certified factor search and root enclosure
// ---------------------------------------------------------------------------

/// Look for a monic factor of a monic polynomial over Q (or Q(i)).
/// Returns a printable factor if one exists; None certifies irreducibility.
pub fn find_monic_factor(minpoly: &[Rat], over_gaussians: bool) -> Result<Option<String>, Error> {
    let d = minpoly.len() - 1;
    if d <= 1 {
        return Ok(None);
    }
    // integralize: z = y / c turns monic rational into monic integer coeffs
    let mut c = BigInt::one();
    for (k, a) in minpoly.iter().enumerate() {
        if k == d {
            continue;
        }
        // need den(a_k) | c^(d-k): take lcm of den^(1/(d-k)) upper -> use den itself
        c = num_integer::Integer::lcm(&c, a.denom());
    }
    let cq = Rat::from_integer(c.clone());
    let int_poly: Vec<Rat> = minpoly
        .iter()
        .enumerate()
        .map(|(k, a)| a * pow_rat(&cq, (d - k) as i64))
        .collect();
    debug_assert!(int_poly.iter().all(|v| v.denom().is_one()));
    let gp = gp_from_rats(&int_poly);
    let roots = enclose_roots(&gp)?;
    // refine until every coefficient enclosure of every subset product is
    // narrower than 1/2 (so at most one (Gaussian) integer candidate)
    let mut prec = 64u32;
    loop {
        let balls: Vec<CRatBall> = refine_roots(&gp, &roots, prec)?;
        let mut widest = Rat::zero();
        let subsets = subset_candidates(&balls, d);
        for (mask, coeffs) in &subsets {
            let _ = mask;
            for cb in coeffs {
                if cb.rad > widest {
                    widest = cb.rad.clone();
                }
            }
        }
        if widest < Rat::new(BigInt::from(2), BigInt::from(5)) {
            for (_, coeffs) in &subsets {
                // round each coefficient to the nearest (Gaussian) integer
                let mut cand: Vec<GaussRat> = Vec::with_capacity(coeffs.len() + 1);
                let mut viable = true;
                for cb in coeffs {
                    let re = round_to_int(&cb.re);
                    let im = round_to_int(&cb.im);
                    if !over_gaussians && !im.is_zero() {
                        viable = false;
                        break;
                    }
                    // candidate must lie inside the enclosure
                    if (&cb.re - Rat::from_integer(re.clone())).abs() > &cb.rad + Rat::new(BigInt::one(), BigInt::from(2))
                        || (&cb.im - Rat::from_integer(im.clone())).abs() > &cb.rad + Rat::new(BigInt::one(), BigInt::from(2))
                    {
                        viable = false;
                        break;
                    }
                    cand.push(GaussRat::new(Rat::from_integer(re), Rat::from_integer(im)));
                }
                if !viable {
                    continue;
                }
                cand.push(GaussRat::one()); // monic
                let cand = gp_trim(cand);
                if cand.len() <= 1 || cand.len() >= gp.len() {
                    continue;
                }
                let (_, rem) = gp_divmod(&gp, &cand);
                if rem.is_empty() {
                    // translate back: factor in y; report in y-coordinates
                    let disp = cand
                        .iter()
                        .enumerate()
                        .map(|(k, g)| format!("({}+{}i)y^{}", fmt_rat(&g.re), fmt_rat(&g.im), k))
                        .collect::<Vec<_>>()
                        .join(" + ");
                    return Ok(Some(disp));
                }
            }
            return Ok(None);
        }
        prec *= 2;
        if prec > 1 << 16 {
            return Err(Error::NonIsolating("factor search precision runaway".into()));
        }
    }
}

fn round_to_int(r: &Rat) -> BigInt {
    let two = BigInt::from(2);
    let num = r.numer() * &two + r.denom();
    num_integer::Integer::div_floor(&num, &(r.denom() * &two))
}

/// Products over all proper nonempty subsets (up to half the degree,
/// complements covered by division) of the enclosed roots.
fn subset_candidates(balls: &[CRatBall], d: usize) -> Vec<(u32, Vec<CRatBall>)> {
    let n = balls.len();
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) - 1 {
        let size = mask.count_ones() as usize;
        if size > d / 2 {
            continue;
        }
        // coefficients of prod (y - r_i) for i in mask, ascending degree
        let mut coeffs = vec![CRatBall::exact(Rat::one(), Rat::zero())];
        for (i, b) in balls.iter().enumerate() {
            if mask & (1 << i) == 0 {
                continue;
            }
            let neg = CRatBall { re: -b.re.clone(), im: -b.im.clone(), rad: b.rad.clone() };
            let mut next = vec![CRatBall::exact(Rat::zero(), Rat::zero()); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] = next[k + 1].add(c);
                next[k] = next[k].add(&c.mul(&neg));
            }
            coeffs = next;
        }
        coeffs.pop(); // drop the monic leading 1
        out.push((mask, coeffs));
    }
    out
}

/// Durand-Kerner root finding with exact a-posteriori radii.
fn enclose_roots(gp: &GPoly) -> Result<Vec<CRatBall>, Error> {
    refine_roots(gp, &[], 128)
}

fn refine_roots(gp: &GPoly, _seed: &[CRatBall], prec: u32) -> Result<Vec<CRatBall>, Error> {
    let d = gp.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    let mut prec = prec.max(96);
    'outer: loop {
        // start points: perturbed powers of 0.4 + 0.9i
        let mut zs: Vec<CBig> = Vec::with_capacity(d);
        let base = CBig::from_rats(&Rat::new(2.into(), 5.into()), &Rat::new(9.into(), 10.into()), prec);
        let mut cur = CBig::from_rats(&Rat::new(13.into(), 10.into()), &Rat::new(1.into(), 7.into()), prec);
        for _ in 0..d {
            cur = cur.mul(&base);
            zs.push(cur.clone());
        }
        for _iter in 0..200 {
            let mut max_step = DyFloat::zero();
            for i in 0..d {
                let pi = eval_cbig(gp, &zs[i]);
                let mut denom = CBig::from_rats(&gp[d].re, &gp[d].im, prec);
                for j in 0..d {
                    if j != i {
                        denom = denom.mul(&zs[i].sub(&zs[j]));
                    }
                }
                if denom.is_zero() {
                    // nudge and restart this precision
                    zs[i] = zs[i].add(&CBig::from_rats(
                        &Rat::new(1.into(), 1000.into()),
                        &Rat::new(1.into(), 997.into()),
                        prec,
                    ));
                    continue;
                }
                let step = pi.div(&denom);
                let sb = step.abs_upper();
                if sb.partial_cmp(&max_step) == Some(std::cmp::Ordering::Greater) {
                    max_step = sb;
                }
                zs[i] = zs[i].sub(&step);
            }
            let tiny = DyFloat::from_int(1).mul_pow2(-(prec as i64) + 8);
            if max_step.partial_cmp(&tiny) == Some(std::cmp::Ordering::Less) {
                break;
            }
        }
        // exact certification
        let dgp = gp_derivative(gp);
        let degq = Rat::from_integer(BigInt::from(d));
        let mut balls = Vec::with_capacity(d);
        for z in &zs {
            let zq = GaussRat::new(z.re.to_rat(), z.im.to_rat());
            let pv = gp_eval(gp, &zq);
            let dv = gp_eval(&dgp, &zq);
            if dv.is_zero() {
                prec *= 2;
                continue 'outer;
            }
            let eta = crate::cbig::sqrt_upper_rat(&pv.norm())
                / crate::cbig::sqrt_lower_rat_nonzero(&dv.norm());
            balls.push(CRatBall { re: zq.re, im: zq.im, rad: &degq * eta });
        }
        // disjointness => exactly one root per ball
        let mut ok = true;
        for i in 0..d {
            for j in (i + 1)..d {
                let dist = euclid_lower(&balls[i], &balls[j]);
                if dist <= &balls[i].rad + &balls[j].rad {
                    ok = false;
                }
            }
        }
        if ok {
            return Ok(balls);
        }
        prec *= 2;
        if prec > 1 << 15 {
            return Err(Error::NonIsolating("root enclosure failed (clustered roots?)".into()));
        }
    }
}

fn euclid_lower(a: &CRatBall, b: &CRatBall) -> Rat {
    // lower bound via max metric: |a-b|_2 >= max(|dre|, |dim|)
    let dre = (&a.re - &b.re).abs();
    let dim = (&a.im - &b.im).abs();
    if dre > dim {
        dre
    } else {
        dim
    }
}

fn root_separation(roots: &[CRatBall]) -> Rat {
    let mut sep: Option<Rat> = None;
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            let lo = euclid_lower(&roots[i], &roots[j]) - &roots[i].rad - &roots[j].rad;
            let lo = if lo.is_negative() { Rat::zero() } else { lo };
            if sep.as_ref().map_or(true, |s| &lo < s) {
                sep = Some(lo);
            }
        }
    }
    sep.unwrap_or_else(Rat::one)
}

// ---------------------------------------------------------------------------
// roots of elements: alg_root and field upgrades
// ---------------------------------------------------------------------------

/// Branch selector for n-th roots.
#[derive(Clone, Debug)]
pub enum Branch {
    Principal,
    /// Multiply the principal root by i^k (k = 0..n-1); k=2 is the sign flip.
    UnityPower(u32),
    /// Nearest to the given complex approximation.
    Nearest { re: Rat, im: Rat },
}

/// n-th root of an exact scalar. The result may live in an extension;
/// the containing field is returned alongside. See the crate docs for the
/// supported shapes (rationals, and monomials u * theta^k over binomial
/// generators with rational root of u).
pub fn alg_root(a: &AlgScalar, n: u32, branch: &Branch) -> Result<(AlgScalar, FieldRef), Error> {
    if a.is_zero() {
        return Err(Error::Precondition("root of zero".into()));
    }
    assert!(n >= 2);
    if let Some(g) = a.as_gauss_rational() {
        if g.is_real() {
            return rational_root(&a.field, &g.re, n, branch);
        }
        return Err(Error::UnsupportedRoot(
            "roots of non-real Gaussian rationals are not supported".into(),
        ));
    }
    // monomial over a binomial generator
    let (bn, base) = match &a.field.kind {
        GeneratorKind::Binomial { n, base } => (*n, base.clone()),
        _ => {
            return Err(Error::UnsupportedRoot(
                "non-rational radicand over a non-binomial generator".into(),
            ))
        }
    };
    let nz: Vec<usize> = a
        .coords
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, _)| k)
        .collect();
    if nz.len() != 1 {
        return Err(Error::UnsupportedRoot("radicand is not a monomial in the generator".into()));
    }
    let k = nz[0];
    let u = a.coords[k].clone();
    if !u.is_real() {
        return Err(Error::UnsupportedRoot("monomial coefficient is not real".into()));
    }
    // u^(1/n) must simplify to a rational (times a possible i for sqrt of negatives)
    let (ur, u_is_negative) = match nth_root_exact(&u.re, n) {
        Some(r) => (r, false),
        None => {
            if n == 2 && u.re.is_negative() {
                match nth_root_exact(&-u.re.clone(), 2) {
                    Some(r) => (r, true),
                    None => {
                        return Err(Error::UnsupportedRoot(format!(
                            "coefficient {} has no rational {}-th root",
                            fmt_rat(&u.re),
                            n
                        )))
                    }
                }
            } else {
                return Err(Error::UnsupportedRoot(format!(
                    "coefficient {} has no rational {}-th root",
                    fmt_rat(&u.re),
                    n
                )));
            }
        }
    };
    // theta^(k/n) = base^(k / (bn * n)); reduce the exponent
    let kk = k as u32;
    let g = num_integer::Integer::gcd(&kk, &n);
    let p = kk / g;
    let q0 = n / g; // theta^(k/n) = (base^(1/(bn*q0)))^p
    let new_deg = bn * q0;
    let adjoin_i = a.field.adjoin_i || u_is_negative;
    let (value, field) = if q0 == 1 {
        // n divides k: stays over the same generator
        let f = if adjoin_i == a.field.adjoin_i {
            a.field.clone()
        } else {
            NumberField::binomial(bn, base.clone(), adjoin_i)?
        };
        (AlgScalar::generator(&f).pow(p)?, f)
    } else {
        let f = NumberField::binomial(new_deg, base.clone(), adjoin_i)?;
        (AlgScalar::generator(&f).pow(p)?, f)
    };
    let mut root = value.scale_rat(&ur);
    if u_is_negative {
        root = root.mul_i()?;
    }
    apply_branch(root, n, branch, &field)
}

fn rational_root(
    home: &FieldRef,
    q: &Rat,
    n: u32,
    branch: &Branch,
) -> Result<(AlgScalar, FieldRef), Error> {
    if let Some(r) = nth_root_exact(q, n) {
        // rational root exists (principal for even n, real for odd)
        let f = home.clone();
        return apply_branch(AlgScalar::from_rat(&f, r), n, branch, &f);
    }
    let (s, m) = nth_power_decompose(q, n);
    let (scale, radicand) = integralize_radical(&m, n);
    // theta = radicand^(1/n) (signed radicand keeps the phase in theta)
    let base = Rat::from_integer(radicand);
    let need_i = home.adjoin_i || matches!(branch, Branch::UnityPower(k) if k % 2 == 1);
    let field = NumberField::binomial(n, base, need_i)?;
    let root = AlgScalar::generator(&field).scale_rat(&(&s * &scale));
    apply_branch(root, n, branch, &field)
}

fn apply_branch(
    principal: AlgScalar,
    n: u32,
    branch: &Branch,
    field: &FieldRef,
) -> Result<(AlgScalar, FieldRef), Error> {
    let rotated = |k: u32| -> Result<AlgScalar, Error> {
        let k = k % n;
        match (n, k) {
            (_, 0) => Ok(principal.clone()),
            (2, 1) => Ok(principal.neg()),
            (4, _) => {
                let mut v = principal.clone();
                for _ in 0..k {
                    v = v.mul_i()?;
                }
                Ok(v)
            }
            _ => Err(Error::UnsupportedRoot(format!(
                "unity power {k} not representable for n = {n}"
            ))),
        }
    };
    match branch {
        Branch::Principal => Ok((principal.clone(), field.clone())),
        Branch::UnityPower(k) => Ok((rotated(*k)?, field.clone())),
        Branch::Nearest { re, im } => {
            let mut best: Option<(Rat, AlgScalar)> = None;
            for k in 0..n {
                let cand = match rotated(k) {
                    Ok(c) => c,
                    Err(_) => continue,
                };
                let e = cand.embed_ball(48);
                let dist = (&e.re - re).abs() + (&e.im - im).abs();
                if best.as_ref().map_or(true, |(b, _)| &dist < b) {
                    best = Some((dist, cand));
                }
            }
            let (_, v) = best.ok_or_else(|| Error::UnsupportedRoot("no representable branch".into()))?;
            Ok((v, field.clone()))
        }
    }
}

/// Join Q(sqrt(m)) and Q(sqrt(n)) (m, n rational, possibly negative) into a
/// single field, returning images of both square roots (principal branches).
pub fn join_quadratic(m: &Rat, n: &Rat, adjoin_i: bool) -> Result<(FieldRef, AlgScalar, AlgScalar), Error> {
    // trivial cases: a rational square on either side
    if let Some(rm) = rational_sqrt_signed(m) {
        let (f, sn) = single_sqrt_field(n, adjoin_i || rm.1)?;
        let mut vm = AlgScalar::from_rat(&f, rm.0);
        if rm.1 {
            vm = vm.mul_i()?;
        }
        return Ok((f, vm, sn));
    }
    if let Some(rn) = rational_sqrt_signed(n) {
        let (f, sm) = single_sqrt_field(m, adjoin_i || rn.1)?;
        let mut vn = AlgScalar::from_rat(&f, rn.0);
        if rn.1 {
            vn = vn.mul_i()?;
        }
        return Ok((f, sm, vn));
    }
    let prod = m * n;
    if let Some(sp) = nth_root_exact(&prod, 2) {
        // sqrt(n) = sqrt(mn)/sqrt(m) lives in Q(sqrt(m)); sp sign: principal
        // sqrt(m)sqrt(n) = ± sqrt(mn): fix the sign by embeddings below
        let (f, sm) = single_sqrt_field(m, adjoin_i)?;
        let vn = AlgScalar::from_rat(&f, sp.clone()).div(&sm)?;
        // check the principal branch sign numerically and flip if needed
        let want = principal_sqrt_ball(n);
        let got = vn.embed_ball(64);
        let d_plus = (&got.re - &want.0).abs() + (&got.im - &want.1).abs();
        let gneg = vn.neg().embed_ball(64);
        let d_minus = (&gneg.re - &want.0).abs() + (&gneg.im - &want.1).abs();
        let vn = if d_plus <= d_minus { vn } else { vn.neg() };
        return Ok((f, sm, vn));
    }
    // genuine biquadratic: gamma = sqrt(m) + sqrt(n)
    let two = Rat::from_integer(BigInt::from(2));
    let minpoly = vec![
        pow_rat(&(m - n), 2),
        Rat::zero(),
        -&two * (m + n),
        Rat::zero(),
        Rat::one(),
    ];
    let (mre, mim) = principal_sqrt_ball(m);
    let (nre, nim) = principal_sqrt_ball(n);
    let disk = IsolatingDisk {
        re: &mre + &nre,
        im: &mim + &nim,
        radius: Rat::new(BigInt::one(), BigInt::from(1_000_000)),
    };
    let field = NumberField::adjoin(minpoly, disk, adjoin_i)?;
    let gamma = AlgScalar::generator(&field);
    // sqrt(m) = (gamma^2 + m - n) / (2 gamma)
    let g2 = gamma.mul(&gamma)?;
    let sm = g2
        .add(&AlgScalar::from_rat(&field, m - n))?
        .div(&gamma.scale_rat(&two))?;
    let sn = gamma.sub(&sm)?;
    Ok((field, sm, sn))
}

fn rational_sqrt_signed(x: &Rat) -> Option<(Rat, bool)> {
    if x.is_negative() {
        nth_root_exact(&-x.clone(), 2).map(|r| (r, true))
    } else {
        nth_root_exact(x, 2).map(|r| (r, false))
    }
}

fn single_sqrt_field(x: &Rat, adjoin_i: bool) -> Result<(FieldRef, AlgScalar), Error> {
    if let Some((r, neg)) = rational_sqrt_signed(x) {
        let f = NumberField::rationals(adjoin_i || neg);
        let mut v = AlgScalar::from_rat(&f, r);
        if neg {
            v = v.mul_i()?;
        }
        return Ok((f, v));
    }
    let (s, m) = nth_power_decompose(x, 2);
    let (scale, radicand) = integralize_radical(&m, 2);
    let f = NumberField::binomial(2, Rat::from_integer(radicand), adjoin_i)?;
    Ok((f.clone(), AlgScalar::generator(&f).scale_rat(&(&s * &scale))))
}

fn principal_sqrt_ball(x: &Rat) -> (Rat, Rat) {
    if x.is_negative() {
        (Rat::zero(), crate::cbig::sqrt_upper_rat(&-x.clone()))
    } else {
        (crate::cbig::sqrt_upper_rat(x), Rat::zero())
    }
}
