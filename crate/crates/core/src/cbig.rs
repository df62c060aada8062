//! Arbitrary-precision dyadic floating point and complex values.
//!
//! `DyFloat` is a signed mantissa times a power of two. Addition and
//! multiplication are exact; rounding happens only where requested
//! (`round`, `div`, `sqrt`), so a value is correctly rounded exactly when
//! the caller says so. `CBig` is the complex pair at a working precision;
//! its ring operations compute exactly and round once, which makes them
//! correctly rounded at the working precision.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

use crate::rat::Rat;

#[derive(Clone, Debug)]
pub struct DyFloat {
    pub mantissa: BigInt,
    pub exp: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Nearest,
    /// Away from zero (use for upper bounds of magnitudes).
    Away,
    /// Toward zero.
    Toward,
}

impl DyFloat {
    pub fn zero() -> Self {
        DyFloat { mantissa: BigInt::zero(), exp: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        DyFloat { mantissa: BigInt::from(n), exp: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    /// Exact conversion from a dyadic rational; errors if the denominator
    /// is not a power of two.
    pub fn from_dyadic(r: &Rat) -> Option<Self> {
        let d = r.denom();
        let bits = d.bits();
        if d >> (bits - 1) != BigInt::one() {
            return None; // not a power of two
        }
        Some(DyFloat { mantissa: r.numer().clone(), exp: -((bits - 1) as i64) })
    }

    /// Directed conversion from any rational at `prec` significant bits.
    pub fn from_rat(r: &Rat, prec: u32, mode: Round) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        // scale numerator so the quotient carries prec+2 bits
        let nbits = r.numer().magnitude().bits() as i64;
        let dbits = r.denom().magnitude().bits() as i64;
        let shift = (prec as i64 + 2) - (nbits - dbits);
        let (num, exp) = if shift >= 0 {
            (r.numer() << shift as u64, -shift)
        } else {
            (r.numer().clone(), 0)
        };
        let mut q = DyFloat { mantissa: BigInt::zero(), exp };
        let (quot, rem) = num_integer::Integer::div_rem(&num, r.denom());
        q.mantissa = quot;
        if !rem.is_zero() {
            // direct the final ulp
            let up = match mode {
                Round::Toward => false,
                Round::Away => true,
                Round::Nearest => {
                    let two_rem = rem.magnitude() << 1;
                    two_rem >= *r.denom().magnitude()
                }
            };
            if up {
                if r.is_negative() {
                    q.mantissa -= 1;
                } else {
                    q.mantissa += 1;
                }
            }
        }
        // shift<0 case keeps full integer precision (exact or larger)
        q.round(prec, mode)
    }

    pub fn to_rat(&self) -> Rat {
        if self.exp >= 0 {
            Rat::from_integer(&self.mantissa << self.exp as u64)
        } else {
            Rat::new(self.mantissa.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.mantissa.magnitude().bits() as i64;
        if bits == 0 {
            return 0.0;
        }
        let drop = (bits - 53).max(0);
        let m = (&self.mantissa >> drop as u64).to_f64().unwrap_or(0.0);
        m * 2f64.powi((self.exp + drop) as i32)
    }

    pub fn bits(&self) -> u64 {
        self.mantissa.magnitude().bits()
    }

    /// Round to `prec` significant bits with the given mode.
    pub fn round(&self, prec: u32, mode: Round) -> Self {
        let bits = self.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let drop = bits - prec as u64;
        let kept = &self.mantissa >> drop;
        let rem = &self.mantissa - (&kept << drop);
        let mut m = kept;
        if !rem.is_zero() {
            let up = match mode {
                Round::Toward => false,
                Round::Away => true,
                Round::Nearest => {
                    let two_rem = rem.magnitude() << 1;
                    two_rem >= (BigUintOne::one() << drop)
                }
            };
            if up {
                if self.mantissa.is_negative() {
                    m -= 1;
                } else {
                    m += 1;
                }
            }
        }
        DyFloat { mantissa: m, exp: self.exp + drop as i64 }
    }

    pub fn neg(&self) -> Self {
        DyFloat { mantissa: -self.mantissa.clone(), exp: self.exp }
    }

    pub fn abs(&self) -> Self {
        DyFloat { mantissa: self.mantissa.abs(), exp: self.exp }
    }

    /// Exact addition.
    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mantissa << (self.exp - e) as u64;
        let b = &other.mantissa << (other.exp - e) as u64;
        DyFloat { mantissa: a + b, exp: e }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Exact multiplication.
    pub fn mul(&self, other: &Self) -> Self {
        DyFloat { mantissa: &self.mantissa * &other.mantissa, exp: self.exp + other.exp }
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        DyFloat { mantissa: self.mantissa.clone(), exp: self.exp + k }
    }

    /// Correctly rounded division at `prec` bits.
    pub fn div(&self, other: &Self, prec: u32, mode: Round) -> Self {
        assert!(!other.is_zero(), "DyFloat division by zero");
        if self.is_zero() {
            return Self::zero();
        }
        let nbits = self.bits() as i64;
        let dbits = other.bits() as i64;
        let shift = (prec as i64 + 2) - (nbits - dbits);
        let shift = shift.max(0) as u64;
        let num = &self.mantissa << shift;
        let (quot, rem) = num_integer::Integer::div_rem(&num, &other.mantissa);
        let mut q = quot;
        if !rem.is_zero() {
            let negative = self.mantissa.is_negative() != other.mantissa.is_negative();
            let up = match mode {
                Round::Toward => false,
                Round::Away => true,
                Round::Nearest => (rem.magnitude() << 1) >= *other.mantissa.magnitude(),
            };
            if up {
                if negative {
                    q -= 1;
                } else {
                    q += 1;
                }
            }
        }
        DyFloat { mantissa: q, exp: self.exp - other.exp - shift as i64 }
            .round(prec, mode)
    }

    /// Correctly rounded square root at `prec` bits (input must be >= 0).
    pub fn sqrt(&self, prec: u32, mode: Round) -> Self {
        assert!(!self.is_negative(), "DyFloat sqrt of negative");
        if self.is_zero() {
            return Self::zero();
        }
        // scale to even exponent with at least 2*prec+4 mantissa bits
        let mut m = self.mantissa.clone();
        let mut e = self.exp;
        let want = 2 * (prec as u64 + 2);
        let bits = m.magnitude().bits();
        let mut extra = want.saturating_sub(bits) as i64;
        if (e - extra) % 2 != 0 {
            extra += 1;
        }
        m <<= extra as u64;
        e -= extra;
        let s = m.sqrt();
        let exact = &s * &s == m;
        let mut r = s;
        if !exact {
            let up = match mode {
                Round::Toward => false,
                Round::Away => true,
                Round::Nearest => {
                    // compare (2r+1)^2 with 4m
                    let t = (&r << 1u8) + 1;
                    &t * &t <= (&m << 2u8)
                }
            };
            if up {
                r += 1;
            }
        }
        DyFloat { mantissa: r, exp: e / 2 }.round(prec, mode)
    }

}

// small helper so `1u8 << drop` works with u64 drop counts
struct BigUintOne;
impl BigUintOne {
    fn one() -> num_bigint::BigUint {
        num_bigint::BigUint::one()
    }
}

impl PartialEq for DyFloat {
    fn eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl PartialOrd for DyFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let d = self.sub(other);
        Some(if d.mantissa.is_negative() {
            Ordering::Less
        } else if d.mantissa.is_zero() {
            Ordering::Equal
        } else {
            Ordering::Greater
        })
    }
}

/// Complex dyadic float at a working precision (>= 64 bits).
#[derive(Clone, Debug)]
pub struct CBig {
    pub re: DyFloat,
    pub im: DyFloat,
    pub prec: u32,
}

impl CBig {
    pub fn new(re: DyFloat, im: DyFloat, prec: u32) -> Self {
        assert!(prec >= 64, "working precision must be at least 64 bits");
        CBig { re: re.round(prec, Round::Nearest), im: im.round(prec, Round::Nearest), prec }
    }

    pub fn zero(prec: u32) -> Self {
        CBig::new(DyFloat::zero(), DyFloat::zero(), prec)
    }

    pub fn from_rats(re: &Rat, im: &Rat, prec: u32) -> Self {
        CBig {
            re: DyFloat::from_rat(re, prec, Round::Nearest),
            im: DyFloat::from_rat(im, prec, Round::Nearest),
            prec,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        CBig::new(self.re.add(&o.re), self.im.add(&o.im), self.prec.min(o.prec))
    }

    pub fn sub(&self, o: &Self) -> Self {
        CBig::new(self.re.sub(&o.re), self.im.sub(&o.im), self.prec.min(o.prec))
    }

    pub fn neg(&self) -> Self {
        CBig { re: self.re.neg(), im: self.im.neg(), prec: self.prec }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let re = self.re.mul(&o.re).sub(&self.im.mul(&o.im));
        let im = self.re.mul(&o.im).add(&self.im.mul(&o.re));
        CBig::new(re, im, self.prec.min(o.prec))
    }

    pub fn div(&self, o: &Self) -> Self {
        let prec = self.prec.min(o.prec);
        assert!(!o.is_zero(), "CBig division by zero");
        let den = o.re.mul(&o.re).add(&o.im.mul(&o.im)); // exact
        let nre = self.re.mul(&o.re).add(&self.im.mul(&o.im));
        let nim = self.im.mul(&o.re).sub(&self.re.mul(&o.im));
        CBig {
            re: nre.div(&den, prec, Round::Nearest),
            im: nim.div(&den, prec, Round::Nearest),
            prec,
        }
    }

    /// |z|^2, exact then rounded.
    pub fn norm_sqr(&self) -> DyFloat {
        self.re.mul(&self.re).add(&self.im.mul(&self.im)).round(self.prec, Round::Nearest)
    }

    /// Upper bound on |z|.
    pub fn abs_upper(&self) -> DyFloat {
        self.re
            .mul(&self.re)
            .add(&self.im.mul(&self.im))
            .sqrt(self.prec, Round::Away)
    }

    pub fn abs(&self) -> DyFloat {
        self.re
            .mul(&self.re)
            .add(&self.im.mul(&self.im))
            .sqrt(self.prec, Round::Nearest)
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = CBig::from_rats(&Rat::one(), &Rat::zero(), self.prec);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Principal complex square root.
    pub fn sqrt(&self) -> Self {
        let prec = self.prec;
        if self.is_zero() {
            return self.clone();
        }
        let r = self.abs();
        // re' = sqrt((r + re)/2), im' = sign(im) sqrt((r - re)/2)
        let half = |v: DyFloat| v.mul_pow2(-1);
        let a = half(r.add(&self.re)).sqrt(prec, Round::Nearest);
        let mut b = half(r.sub(&self.re)).sqrt(prec, Round::Nearest);
        if self.im.is_negative() {
            b = b.neg();
        }
        if !self.im.is_zero() || !self.re.is_negative() {
            CBig { re: a, im: b, prec }
        } else {
            // negative real axis: principal root is +i sqrt(|x|)
            CBig { re: DyFloat::zero(), im: self.re.abs().sqrt(prec, Round::Nearest), prec }
        }
    }

    pub fn to_f64s(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// sin and cos by Taylor series; accurate to roughly 2^-(prec) for
    /// arguments with |z| <= 4 (term count chosen accordingly).
    pub fn sin_cos(&self) -> (Self, Self) {
        let prec = self.prec;
        let work = prec + 64;
        let z = CBig { re: self.re.clone(), im: self.im.clone(), prec: work };
        let z2 = z.mul(&z);
        let mut sin_acc = z.clone();
        let mut cos_acc = CBig::from_rats(&Rat::one(), &Rat::zero(), work);
        let mut term_s = z.clone();
        let mut term_c = cos_acc.clone();
        let mut k: i64 = 0;
        loop {
            k += 2;
            // cos: next term *= -z^2 / ((k-1) k); sin: *= -z^2 / (k (k+1))
            let dc = DyFloat::from_int((k - 1) * k);
            let ds = DyFloat::from_int(k * (k + 1));
            term_c = term_c.mul(&z2).neg();
            term_c = CBig {
                re: term_c.re.div(&dc, work, Round::Nearest),
                im: term_c.im.div(&dc, work, Round::Nearest),
                prec: work,
            };
            term_s = term_s.mul(&z2).neg();
            term_s = CBig {
                re: term_s.re.div(&ds, work, Round::Nearest),
                im: term_s.im.div(&ds, work, Round::Nearest),
                prec: work,
            };
            cos_acc = cos_acc.add(&term_c);
            sin_acc = sin_acc.add(&term_s);
            let small = |t: &CBig, acc: &CBig| {
                let tb = t.re.abs().add(&t.im.abs());
                if tb.is_zero() {
                    return true;
                }
                let ab = acc.re.abs().add(&acc.im.abs()).add(&DyFloat::from_int(1));
                tb.mul_pow2(2 * prec as i64).partial_cmp(&ab) == Some(Ordering::Less)
            };
            if small(&term_s, &sin_acc) && small(&term_c, &cos_acc) {
                break;
            }
            assert!(k < 10_000, "sin_cos argument too large");
        }
        (
            CBig::new(sin_acc.re, sin_acc.im, prec),
            CBig::new(cos_acc.re, cos_acc.im, prec),
        )
    }
}

/// Exact complex interval over the rationals: midpoint (re, im) plus a
/// radius in the max metric. Every operation is exact rational arithmetic,
/// so enclosures are rigorous by construction.
#[derive(Clone, Debug)]
pub struct CRatBall {
    pub re: Rat,
    pub im: Rat,
    pub rad: Rat,
}

impl CRatBall {
    pub fn exact(re: Rat, im: Rat) -> Self {
        CRatBall { re, im, rad: Rat::zero() }
    }

    pub fn add(&self, o: &Self) -> Self {
        CRatBall {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
            rad: &self.rad + &o.rad,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        CRatBall {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
            rad: &self.rad + &o.rad,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        // |center| upper bounds via |re|+|im| (>= Euclidean norm)
        let a = self.center_bound();
        let b = o.center_bound();
        CRatBall {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
            rad: a * &o.rad + b * &self.rad + &self.rad * &o.rad,
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let ac = c.abs();
        CRatBall {
            re: &self.re * c,
            im: &self.im * c,
            rad: &self.rad * ac,
        }
    }

    fn center_bound(&self) -> Rat {
        self.re.abs() + self.im.abs()
    }

    /// Rigorous rational upper bound for |ball| (Euclidean).
    pub fn abs_upper(&self) -> Rat {
        sqrt_upper_rat(&(&self.re * &self.re + &self.im * &self.im)) + &self.rad
    }

    /// Rigorous rational lower bound for |ball| (clamped at 0).
    pub fn abs_lower(&self) -> Rat {
        let lo = sqrt_lower_rat(&(&self.re * &self.re + &self.im * &self.im)) - &self.rad;
        if lo.is_negative() {
            Rat::zero()
        } else {
            lo
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.abs_lower().is_zero()
    }
}

/// Rational r with r >= sqrt(x), within a relative 2^-64 or so.
pub fn sqrt_upper_rat(x: &Rat) -> Rat {
    assert!(!x.is_negative());
    if x.is_zero() {
        return Rat::zero();
    }
    let f = DyFloat::from_rat(x, 128, Round::Away);
    f.sqrt(128, Round::Away).to_rat()
}

/// Rational r with 0 <= r <= sqrt(x).
pub fn sqrt_lower_rat(x: &Rat) -> Rat {
    assert!(!x.is_negative());
    if x.is_zero() {
        return Rat::zero();
    }
    let f = DyFloat::from_rat(x, 128, Round::Toward);
    f.sqrt(128, Round::Toward).to_rat()
}

/// Like `sqrt_lower_rat` but requires x > 0 and returns a positive bound.
pub fn sqrt_lower_rat_nonzero(x: &Rat) -> Rat {
    assert!(x.is_positive(), "expected a positive rational");
    let r = sqrt_lower_rat(x);
    assert!(r.is_positive(), "lower sqrt bound collapsed to zero");
    r
}
