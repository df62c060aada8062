//! Exact rational arithmetic helpers on top of `num_rational::BigRational`.
//!
//! `BigRational` already maintains the invariants the engine needs
//! (reduced fraction, positive denominator), so `Rat` is a type alias and
//! this module adds parsing, formatting and radical-simplification helpers.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

pub type Rat = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parse an exact rational from "p/q", an integer string, or a finite
/// decimal such as "-0.125". Decimals are converted exactly.
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not an exact rational: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let mut v = Rat::from_integer(int_part.abs()) + Rat::new(digits, scale);
        if neg {
            v = -v;
        }
        return Ok(v);
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rat::from_integer(n))
}

/// Format as "p/q" ("p" when integral). Lossless.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact square root of a rational, if it is a perfect square.
pub fn sqrt_exact(r: &Rat) -> Option<Rat> {
    nth_root_exact(r, 2)
}

/// Exact n-th root of a rational, if one exists in Q.
/// For even n the input must be nonnegative; the nonnegative root is returned.
pub fn nth_root_exact(r: &Rat, n: u32) -> Option<Rat> {
    if r.is_zero() {
        return Some(Rat::zero());
    }
    if r.is_negative() {
        if n % 2 == 0 {
            return None;
        }
        return nth_root_exact(&-r.clone(), n).map(|x| -x);
    }
    let num = r.numer().to_biguint()?;
    let den = r.denom().to_biguint()?;
    let rn = num.nth_root(n);
    let rd = den.nth_root(n);
    if rn.pow(n) == num && rd.pow(n) == den {
        Some(Rat::new(rn.into(), rd.into()))
    } else {
        None
    }
}

pub fn is_perfect_square(r: &Rat) -> bool {
    !r.is_negative() && sqrt_exact(r).is_some()
}

/// r^k for integer k (k may be negative; r must be nonzero then).
pub fn pow_rat(r: &Rat, k: i64) -> Rat {
    if k >= 0 {
        let mut acc = Rat::one();
        for _ in 0..k {
            acc *= r;
        }
        acc
    } else {
        pow_rat(&(Rat::one() / r), -k)
    }
}

/// Factor a positive integer. Trial division plus Pollard's rho; the
/// engine only meets desk-scale radicands so this always terminates fast.
pub fn factor(n: &BigUint) -> Vec<(BigUint, u32)> {
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    let mut push = |p: BigUint, k: u32| {
        if let Some(e) = out.iter_mut().find(|(q, _)| *q == p) {
            e.1 += k;
        } else {
            out.push((p, k));
        }
    };
    let mut m = n.clone();
    if m.is_zero() || m.is_one() {
        return out;
    }
    for p in 2u64..100_000 {
        let bp = BigUint::from(p);
        if &bp * &bp > m {
            break;
        }
        let mut k = 0;
        while (&m % &bp).is_zero() {
            m /= &bp;
            k += 1;
        }
        if k > 0 {
            push(bp, k);
        }
    }
    if !m.is_one() {
        // remaining cofactor: perfect-power check, then rho
        let mut stack = vec![m];
        while let Some(c) = stack.pop() {
            if c.is_one() {
                continue;
            }
            if is_probable_prime(&c) {
                push(c, 1);
                continue;
            }
            // perfect power?
            let bits = c.bits() as u32;
            let mut split = false;
            for e in (2..=bits).rev() {
                let r = c.nth_root(e);
                if r.pow(e) == c && !r.is_one() {
                    for _ in 0..e {
                        stack.push(r.clone());
                    }
                    split = true;
                    break;
                }
            }
            if split {
                continue;
            }
            let d = pollard_rho(&c);
            stack.push(&c / &d);
            stack.push(d);
        }
    }
    out.sort();
    out
}

fn is_probable_prime(n: &BigUint) -> bool {
    // deterministic Miller-Rabin for < 3.3e24 via fixed witness set
    if n < &BigUint::from(2u32) {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        let bp = BigUint::from(p);
        if n == &bp {
            return true;
        }
        if (n % &bp).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: &BigUint) -> BigUint {
    let one = BigUint::one();
    let mut c = BigUint::from(1u32);
    loop {
        let mut x = BigUint::from(2u32);
        let mut y = BigUint::from(2u32);
        let mut d = one.clone();
        let f = |v: &BigUint, c: &BigUint| (v * v + c) % n;
        while d == one {
            x = f(&x, &c);
            y = f(&f(&y, &c), &c);
            let diff = if x > y { &x - &y } else { &y - &x };
            if diff.is_zero() {
                break;
            }
            d = diff.gcd(n);
        }
        if d != one && &d != n {
            return d;
        }
        c += 1u32;
    }
}

/// Decompose q = s^n * m with m an n-th-power-free *signed* rational.
/// For negative q with even n the sign stays in m (the radical generator
/// absorbs the phase).
pub fn nth_power_decompose(q: &Rat, n: u32) -> (Rat, Rat) {
    assert!(!q.is_zero());
    let neg = q.is_negative();
    let (s_num, m_num) = int_power_part(&q.numer().magnitude().clone(), n);
    let (s_den, m_den) = int_power_part(&q.denom().magnitude().clone(), n);
    let mut s = Rat::new(
        BigInt::from_biguint(Sign::Plus, s_num),
        BigInt::from_biguint(Sign::Plus, s_den),
    );
    let mut m = Rat::new(
        BigInt::from_biguint(Sign::Plus, m_num),
        BigInt::from_biguint(Sign::Plus, m_den),
    );
    if neg {
        if n % 2 == 1 {
            s = -s; // odd roots of negatives are real
        } else {
            m = -m; // the radical generator absorbs the phase
        }
    }
    debug_assert_eq!(pow_rat(&s, n as i64) * &m, q.clone());
    (s, m)
}

fn int_power_part(v: &BigUint, n: u32) -> (BigUint, BigUint) {
    if v.is_one() || v.is_zero() {
        return (BigUint::one(), v.clone());
    }
    let mut s = BigUint::one();
    let mut m = BigUint::one();
    for (p, k) in factor(v) {
        s *= p.pow(k / n);
        m *= p.pow(k % n);
    }
    (s, m)
}

/// Integral radicand form of m^(1/n): returns (scale, radicand) with
/// radicand a signed n-th-power-free integer and m^(1/n) = scale * radicand^(1/n).
pub fn integralize_radical(m: &Rat, n: u32) -> (Rat, BigInt) {
    let num = m.numer().clone();
    let den = m.denom().clone();
    // m = num/den -> num * den^(n-1) / den^n
    let radicand = &num * pow_big(&den, n - 1);
    let sign = if radicand.is_negative() { -1 } else { 1 };
    let (s2, r2) = int_power_part(&radicand.magnitude().clone(), n);
    let scale = Rat::new(BigInt::from_biguint(Sign::Plus, s2), den);
    let rad = BigInt::from(sign) * BigInt::from_biguint(Sign::Plus, r2);
    (scale, rad)
}

fn pow_big(b: &BigInt, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for _ in 0..k {
        acc *= b;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rat("-15/8").unwrap(), rat(-15, 8));
        assert_eq!(parse_rat("42").unwrap(), rat_int(42));
        assert_eq!(parse_rat("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_rat("-0.5").unwrap(), rat(-1, 2));
        assert_eq!(fmt_rat(&rat(-15, 8)), "-15/8");
        assert_eq!(fmt_rat(&rat(6, 3)), "2");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn roots() {
        assert_eq!(sqrt_exact(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(sqrt_exact(&rat(2, 1)), None);
        assert_eq!(nth_root_exact(&rat(-27, 8), 3), Some(rat(-3, 2)));
        assert_eq!(nth_root_exact(&rat(625, 128), 4), None);
    }

    #[test]
    fn power_decompose() {
        // 625/128 = (5/2)^4 * (1/8)
        let (s, m) = nth_power_decompose(&rat(625, 128), 4);
        assert_eq!(s, rat(5, 2));
        assert_eq!(m, rat(1, 8));
        // 63/8 = (3/2)^2 * (7/2)
        let (s, m) = nth_power_decompose(&rat(63, 8), 2);
        assert_eq!(s, rat(3, 2));
        assert_eq!(m, rat(7, 2));
        // -8125/23936 = (5/2)^4 * (-13/1496)
        let (s, m) = nth_power_decompose(&rat(-8125, 23936), 4);
        assert_eq!(s, rat(5, 2));
        assert_eq!(m, rat(-13, 1496));
    }

    #[test]
    fn integralize() {
        // (7/2)^(1/2) = (1/2) * 14^(1/2)
        let (s, r) = integralize_radical(&rat(7, 2), 2);
        assert_eq!(s, rat(1, 2));
        assert_eq!(r, BigInt::from(14));
        // (1/8)^(1/4) = (1/2) * 2^(1/4)   (since 8^3 = 512 = 2^8 * 2)
        let (s, r) = integralize_radical(&rat(1, 8), 4);
        assert_eq!(s, rat(4, 8));
        assert_eq!(r, BigInt::from(2));
    }

    #[test]
    fn factor_basics() {
        let f = factor(&BigUint::from(23936u32));
        assert_eq!(
            f,
            vec![
                (BigUint::from(2u32), 7),
                (BigUint::from(11u32), 1),
                (BigUint::from(17u32), 1)
            ]
        );
    }
}
