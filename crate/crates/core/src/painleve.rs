//! Ablowitz-Ramani-Segur test stage for the system
//!
//!   x_tt = -lambda x - 2 x y,
//!   y_tt = -y - x^2 + C y^2:
//!
//! dominant balances, resonances, and the integrability classification.
//! Resonances are kept exact as quadratic values a + b sqrt(d); rationality
//! is a discriminant perfect-square check, never a float comparison.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

use crate::error::Error;
use crate::field::{AlgScalar, FieldRef, NumberField};
use crate::rat::{fmt_rat, integralize_radical, nth_power_decompose, sqrt_exact, Rat};

#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    pub lambda: Rat,
    pub c: Rat,
}

impl SystemParams {
    pub fn new(lambda: Rat, c: Rat) -> Result<Self, Error> {
        if c.is_zero() {
            return Err(Error::Precondition(
                "C must be nonzero (the Case-2 leading coefficient is 6/C)".into(),
            ));
        }
        Ok(SystemParams { lambda, c })
    }
}

/// Exact quadratic value a + b sqrt(d). Normalized so that b = 0 whenever
/// the value is rational (d square or b zero); then d = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadVal {
    pub a: Rat,
    pub b: Rat,
    pub d: Rat,
}

impl QuadVal {
    pub fn rational(a: Rat) -> Self {
        QuadVal { a, b: Rat::zero(), d: Rat::zero() }
    }

    pub fn new(a: Rat, b: Rat, d: Rat) -> Self {
        if b.is_zero() || d.is_zero() {
            return Self::rational(a);
        }
        if let Some(r) = sqrt_exact(&d) {
            return Self::rational(a + b * r);
        }
        // pull square factors of d into b
        let (s, m) = nth_power_decompose(&d, 2);
        QuadVal { a, b: b * s, d: m }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// True when d < 0 and the value has a nonzero imaginary part.
    pub fn is_complex(&self) -> bool {
        !self.b.is_zero() && self.d.is_negative()
    }

    pub fn as_rat(&self) -> Option<Rat> {
        if self.is_rational() {
            Some(self.a.clone())
        } else {
            None
        }
    }

    /// Exact comparison with a rational (real values only).
    pub fn cmp_rat(&self, r: &Rat) -> Ordering {
        assert!(!self.is_complex(), "ordering of a complex value");
        if self.b.is_zero() {
            return self.a.cmp(r);
        }
        // a + b sqrt(d) vs r  <=>  b sqrt(d) vs r - a
        let rhs = r - &self.a;
        let lhs_sign = self.b.is_positive();
        if rhs.is_zero() {
            return if lhs_sign { Ordering::Greater } else { Ordering::Less };
        }
        if lhs_sign != rhs.is_positive() {
            return if lhs_sign { Ordering::Greater } else { Ordering::Less };
        }
        // same sign: compare squares (flip when both negative)
        let l2 = &self.b * &self.b * &self.d;
        let r2 = &rhs * &rhs;
        let o = l2.cmp(&r2);
        if lhs_sign {
            o
        } else {
            o.reverse()
        }
    }

    pub fn display(&self) -> String {
        if self.is_rational() {
            fmt_rat(&self.a)
        } else if self.a.is_zero() {
            format!("{}*sqrt({})", fmt_rat(&self.b), fmt_rat(&self.d))
        } else {
            format!("{} + {}*sqrt({})", fmt_rat(&self.a), fmt_rat(&self.b), fmt_rat(&self.d))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseLabel {
    Case1,
    Case2,
}

/// Admissible leading x-coefficients of a balance.
#[derive(Clone, Debug)]
pub enum LeadingX {
    /// Case 1: the pair +-3 sqrt(2+C) as an exact scalar (the plus branch)
    /// in its minimal field.
    PlusMinus { value: AlgScalar, field: FieldRef },
    /// Case 2: c1 is arbitrary (fixed later by the resonance system).
    Arbitrary,
    /// C = -2 logarithmic degeneracy: the coefficient vanishes.
    Zero,
}

#[derive(Clone, Debug)]
pub struct Balance {
    pub case: CaseLabel,
    pub alpha: QuadVal,
    pub beta: Rat,
    pub a_alpha: LeadingX,
    pub b_beta: Rat,
    /// Case 1 at C = -2: the dominant term involves a logarithm.
    pub logarithmic: bool,
}

#[derive(Clone, Debug)]
pub struct ResonanceValue {
    pub value: QuadVal,
    pub rational: bool,
    pub multiplicity: u32,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct ResonanceReport {
    pub case: CaseLabel,
    pub values: Vec<ResonanceValue>,
    /// Present when every resonance is rational with half-integer entries.
    pub half_integer: bool,
    pub all_rational: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegrableCase {
    I,
    II,
    III,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassificationKind {
    IntegrableCandidate(IntegrableCase),
    NonintegrableRationalCase1,
    NonintegrableRationalCase2,
    NonintegrableIrrational,
    LogarithmicBranch,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub kind: ClassificationKind,
    pub case1_rational: bool,
    pub case2_rational: Option<bool>,
    /// Case-1 resonances are rational with denominator 2: a Puiseux
    /// expansion is available (the C = -9/8 situation).
    pub puiseux_eligible: bool,
}

/// Both dominant behaviors of the table; Case 2 is included only when a
/// root alpha with beta < Re(alpha) < 0 exists.
pub fn dominant_balances(p: &SystemParams) -> Result<Vec<Balance>, Error> {
    if p.c.is_zero() {
        return Err(Error::Precondition("C must be nonzero".into()));
    }
    let mut out = Vec::new();
    // Case 1: alpha = beta = -2, a = +-3 sqrt(2+C), b = -3
    let two_plus_c = Rat::from_integer(BigInt::from(2)) + &p.c;
    let (a_alpha, logarithmic) = if two_plus_c.is_zero() {
        (LeadingX::Zero, true)
    } else {
        let nine = Rat::from_integer(BigInt::from(9));
        let (value, field) = case1_leading(&(nine * &two_plus_c))?;
        (LeadingX::PlusMinus { value, field }, false)
    };
    out.push(Balance {
        case: CaseLabel::Case1,
        alpha: QuadVal::rational(Rat::from_integer(BigInt::from(-2))),
        beta: Rat::from_integer(BigInt::from(-2)),
        a_alpha,
        b_beta: Rat::from_integer(BigInt::from(-3)),
        logarithmic,
    });
    // Case 2: alpha = (1 - s)/2 with s = sqrt(1 - 48/C); valid iff
    // -2 < Re(alpha) < 0
    let disc = Rat::one() - Rat::from_integer(BigInt::from(48)) / &p.c;
    let alpha = QuadVal::new(
        Rat::new(BigInt::one(), BigInt::from(2)),
        Rat::new(BigInt::from(-1), BigInt::from(2)),
        disc,
    );
    let valid = if alpha.is_complex() {
        false // Re(alpha) = 1/2 > 0
    } else {
        alpha.cmp_rat(&Rat::from_integer(BigInt::from(-2))) == Ordering::Greater
            && alpha.cmp_rat(&Rat::zero()) == Ordering::Less
    };
    if valid {
        out.push(Balance {
            case: CaseLabel::Case2,
            alpha,
            beta: Rat::from_integer(BigInt::from(-2)),
            a_alpha: LeadingX::Arbitrary,
            b_beta: Rat::from_integer(BigInt::from(6)) / &p.c,
            logarithmic: false,
        });
    }
    Ok(out)
}

/// The plus branch of 3 sqrt(2+C) ... passed in as its square 9(2+C).
fn case1_leading(square: &Rat) -> Result<(AlgScalar, FieldRef), Error> {
    if let Some(r) = sqrt_exact(square) {
        let f = NumberField::rationals(false);
        return Ok((AlgScalar::from_rat(&f, r), f));
    }
    if square.is_negative() {
        let mag = -square.clone();
        if let Some(r) = sqrt_exact(&mag) {
            let f = NumberField::rationals(true);
            return Ok((AlgScalar::from_rat(&f, r).mul_i()?, f));
        }
        let (s, m) = nth_power_decompose(&mag, 2);
        let (scale, radicand) = integralize_radical(&m, 2);
        let f = NumberField::binomial(2, Rat::from_integer(radicand), true)?;
        let v = AlgScalar::generator(&f).scale_rat(&(s * scale)).mul_i()?;
        return Ok((v, f));
    }
    let (s, m) = nth_power_decompose(square, 2);
    let (scale, radicand) = integralize_radical(&m, 2);
    let f = NumberField::binomial(2, Rat::from_integer(radicand), false)?;
    Ok((AlgScalar::generator(&f).scale_rat(&(s * scale)), f))
}

/// Exact resonances of a balance, with the r = -1 (t0) and r = 0 (c1)
/// interpretation notes.
pub fn resonances(b: &Balance, p: &SystemParams) -> Result<ResonanceReport, Error> {
    if b.logarithmic {
        return Err(Error::Precondition(
            "logarithmic balance has no power-series resonance structure".into(),
        ));
    }
    let mut values: Vec<ResonanceValue> = Vec::new();
    let mut push = |value: QuadVal, note: &str| {
        let rational = value.is_rational();
        if let Some(existing) = values
            .iter_mut()
            .find(|v| v.value == value)
        {
            existing.multiplicity += 1;
            return;
        }
        values.push(ResonanceValue { value, rational, multiplicity: 1, note: note.to_string() });
    };
    match b.case {
        CaseLabel::Case1 => {
            push(QuadVal::rational(Rat::from_integer(BigInt::from(-1))), "movable singular point t0");
            push(QuadVal::rational(Rat::from_integer(BigInt::from(6))), "new arbitrary constant");
            // 5/2 +- sqrt(1 - 24(1+C))/2
            let disc = Rat::one()
                - Rat::from_integer(BigInt::from(24)) * (Rat::one() + &p.c);
            let half = Rat::new(BigInt::one(), BigInt::from(2));
            let five_half = Rat::new(BigInt::from(5), BigInt::from(2));
            push(QuadVal::new(five_half.clone(), half.clone(), disc.clone()), "new arbitrary constant");
            push(QuadVal::new(five_half, -half, disc), "new arbitrary constant");
        }
        CaseLabel::Case2 => {
            push(QuadVal::rational(Rat::from_integer(BigInt::from(-1))), "movable singular point t0");
            push(QuadVal::rational(Rat::zero()), "arbitrary leading coefficient c1");
            push(QuadVal::rational(Rat::from_integer(BigInt::from(6))), "new arbitrary constant");
            // the fourth resonance pairs with the alpha branch as r = 1 - 2 alpha
            let r4 = QuadVal::new(
                Rat::one() - Rat::from_integer(BigInt::from(2)) * &b.alpha.a,
                Rat::from_integer(BigInt::from(-2)) * &b.alpha.b,
                b.alpha.d.clone(),
            );
            push(r4, "new arbitrary constant (pairs with the alpha branch)");
        }
    }
    let all_rational = values.iter().all(|v| v.rational);
    let half_integer = all_rational
        && values.iter().any(|v| {
            v.value
                .as_rat()
                .map_or(false, |r| r.denom() == &BigInt::from(2))
        });
    Ok(ResonanceReport { case: b.case, values, half_integer, all_rational })
}

/// Integrability classification from the rationality of alpha and r.
pub fn classify(p: &SystemParams) -> Result<Classification, Error> {
    let balances = dominant_balances(p)?;
    let case1 = balances.iter().find(|b| b.case == CaseLabel::Case1).unwrap();
    let case2 = balances.iter().find(|b| b.case == CaseLabel::Case2);
    if case1.logarithmic {
        return Ok(Classification {
            kind: ClassificationKind::LogarithmicBranch,
            case1_rational: false,
            case2_rational: None,
            puiseux_eligible: false,
        });
    }
    let rep1 = resonances(case1, p)?;
    let rep2 = case2.map(|b| resonances(b, p)).transpose()?;
    let case1_rational = rep1.all_rational;
    let case2_rational = rep2.as_ref().map(|r| r.all_rational && case2.unwrap().alpha.is_rational());
    let puiseux_eligible = rep1.half_integer;
    let two = BigInt::from(2);
    let integer_case1 = case1_rational
        && rep1
            .values
            .iter()
            .all(|v| v.value.as_rat().map_or(false, |r| r.denom() < &two));
    let known = [
        (Rat::from_integer(BigInt::from(-1)), Some(Rat::one()), IntegrableCase::I),
        (Rat::from_integer(BigInt::from(-6)), None, IntegrableCase::II),
        (
            Rat::from_integer(BigInt::from(-16)),
            Some(Rat::new(BigInt::one(), BigInt::from(16))),
            IntegrableCase::III,
        ),
    ];
    for (c, lam, which) in known {
        if p.c == c && lam.as_ref().map_or(true, |l| &p.lambda == l) {
            debug_assert!(integer_case1);
            return Ok(Classification {
                kind: ClassificationKind::IntegrableCandidate(which),
                case1_rational,
                case2_rational,
                puiseux_eligible,
            });
        }
    }
    let kind = if case1_rational {
        ClassificationKind::NonintegrableRationalCase1
    } else if case2_rational == Some(true) {
        ClassificationKind::NonintegrableRationalCase2
    } else {
        ClassificationKind::NonintegrableIrrational
    };
    Ok(Classification { kind, case1_rational, case2_rational, puiseux_eligible })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    fn sp(l: (i64, i64), c: (i64, i64)) -> SystemParams {
        SystemParams::new(rat(l.0, l.1), rat(c.0, c.1)).unwrap()
    }

    fn rational_resonances(rep: &ResonanceReport) -> Vec<Rat> {
        let mut v: Vec<Rat> = rep.values.iter().filter_map(|r| r.value.as_rat()).collect();
        v.sort();
        v
    }

    #[test]
    fn case2_for_c_16_5() {
        // alpha = -3/2, b = -15/8, r = {-1, 0, 4, 6}
        let p = sp((1, 9), (-16, 5));
        let bs = dominant_balances(&p).unwrap();
        assert_eq!(bs.len(), 2);
        let b2 = &bs[1];
        assert_eq!(b2.case, CaseLabel::Case2);
        assert_eq!(b2.alpha.as_rat(), Some(rat(-3, 2)));
        assert_eq!(b2.b_beta, rat(-15, 8));
        assert!(matches!(b2.a_alpha, LeadingX::Arbitrary));
        let rep = resonances(b2, &p).unwrap();
        assert_eq!(
            rational_resonances(&rep),
            vec![rat_int(-1), rat_int(0), rat_int(4), rat_int(6)]
        );
        assert!(rep.all_rational);
    }

    #[test]
    fn case1_logarithmic_at_c_minus_2() {
        let p = sp((1, 2), (-2, 1));
        let bs = dominant_balances(&p).unwrap();
        assert!(bs[0].logarithmic);
        assert!(matches!(bs[0].a_alpha, LeadingX::Zero));
        // no Case 2 at C = -2 (alpha = beta)
        assert_eq!(bs.len(), 1);
        assert!(resonances(&bs[0], &p).is_err());
        let cls = classify(&p).unwrap();
        assert_eq!(cls.kind, ClassificationKind::LogarithmicBranch);
    }

    #[test]
    fn case1_for_c_minus_6_has_imaginary_leading() {
        // a_alpha = +-3 sqrt(-4) = +-6i; Case 2 alpha = (1-3)/2 = -1
        let p = sp((1, 1), (-6, 1));
        let bs = dominant_balances(&p).unwrap();
        match &bs[0].a_alpha {
            LeadingX::PlusMinus { value, .. } => {
                let e = value.embed(96);
                assert!(e.re.to_f64().abs() < 1e-18);
                assert!((e.im.to_f64() - 6.0).abs() < 1e-18);
            }
            other => panic!("expected PlusMinus, got {other:?}"),
        }
        assert_eq!(bs[1].alpha.as_rat(), Some(rat_int(-1)));
        let rep1 = resonances(&bs[0], &p).unwrap();
        assert_eq!(
            rational_resonances(&rep1),
            vec![rat_int(-3), rat_int(-1), rat_int(6), rat_int(8)]
        );
        let rep2 = resonances(&bs[1], &p).unwrap();
        assert_eq!(
            rational_resonances(&rep2),
            vec![rat_int(-1), rat_int(0), rat_int(3), rat_int(6)]
        );
    }

    #[test]
    fn case1_resonances_integrable_case_i() {
        let p = sp((1, 1), (-1, 1));
        let bs = dominant_balances(&p).unwrap();
        assert_eq!(bs.len(), 1, "no valid Case 2 for C = -1 > -2");
        let rep = resonances(&bs[0], &p).unwrap();
        assert_eq!(
            rational_resonances(&rep),
            vec![rat_int(-1), rat_int(2), rat_int(3), rat_int(6)]
        );
    }

    #[test]
    fn half_integer_resonances_for_c_minus_9_8() {
        let p = sp((1, 1), (-9, 8));
        let bs = dominant_balances(&p).unwrap();
        let rep = resonances(&bs[0], &p).unwrap();
        assert_eq!(
            rational_resonances(&rep),
            vec![rat_int(-1), rat(3, 2), rat(7, 2), rat_int(6)]
        );
        assert!(rep.half_integer);
        let cls = classify(&p).unwrap();
        assert_eq!(cls.kind, ClassificationKind::NonintegrableRationalCase1);
        assert!(cls.puiseux_eligible);
    }

    #[test]
    fn classify_known_cases() {
        assert_eq!(
            classify(&sp((1, 1), (-1, 1))).unwrap().kind,
            ClassificationKind::IntegrableCandidate(IntegrableCase::I)
        );
        assert_eq!(
            classify(&sp((7, 5), (-6, 1))).unwrap().kind,
            ClassificationKind::IntegrableCandidate(IntegrableCase::II)
        );
        assert_eq!(
            classify(&sp((1, 16), (-16, 1))).unwrap().kind,
            ClassificationKind::IntegrableCandidate(IntegrableCase::III)
        );
        // C = -16/5: Case 1 irrational, Case 2 rational
        let cls = classify(&sp((1, 9), (-16, 5))).unwrap();
        assert_eq!(cls.kind, ClassificationKind::NonintegrableRationalCase2);
        assert!(!cls.case1_rational);
        assert_eq!(cls.case2_rational, Some(true));
        // C = -1 with the wrong lambda stays nonintegrable
        assert_eq!(
            classify(&sp((2, 1), (-1, 1))).unwrap().kind,
            ClassificationKind::NonintegrableRationalCase1
        );
        // generic irrational case
        assert_eq!(
            classify(&sp((1, 1), (-7, 1))).unwrap().kind,
            ClassificationKind::NonintegrableIrrational
        );
    }

    #[test]
    fn quadval_ordering() {
        // -3/2 between -2 and 0; sqrt comparisons exact
        let v = QuadVal::new(rat(1, 2), rat(-1, 2), rat_int(16));
        assert_eq!(v.as_rat(), Some(rat(-3, 2)));
        let irr = QuadVal::new(rat(1, 2), rat(-1, 2), rat_int(17));
        assert!(!irr.is_rational());
        assert_eq!(irr.cmp_rat(&rat_int(-2)), Ordering::Greater);
        assert_eq!(irr.cmp_rat(&rat_int(0)), Ordering::Less);
        assert_eq!(irr.cmp_rat(&rat(-31, 20)), Ordering::Less); // -1.561 vs -1.55
    }
}
