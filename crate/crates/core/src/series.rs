//! Truncated generalized power series in tau = t - t0 with exponents on a
//! grid (base + j/q, q in {1, 2}) over ParamPoly coefficients.
//!
//! Exponents and truncation orders are stored in half-units (the exponent
//! times 2), so a base of -3/2 with integer steps and a base of -2 with
//! half-integer steps both live on one lattice. The step between stored
//! coefficients is 2/q half-units. Truncation is tracked pessimistically;
//! no operation fabricates coefficients beyond the order it can justify.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

use crate::cbig::{CBig, DyFloat};
use crate::error::Error;
use crate::field::{alg_root, AlgScalar, Branch, FieldMap, FieldRef};
use crate::parampoly::{ParamList, ParamPoly};
use crate::rat::Rat;

/// Location of the movable singular point. Internal arithmetic is always
/// in tau; the value only matters when a caller shifts evaluation points.
#[derive(Clone, Debug)]
pub enum SingularPoint {
    Symbolic,
    Value(AlgScalar),
}

#[derive(Clone, Debug)]
pub struct PSeries {
    pub params: ParamList,
    pub field: FieldRef,
    /// Grid denominator (1 or 2); the coefficient step is 2/q half-units.
    pub q: u8,
    /// Leading exponent in half-units (exponent * 2).
    pub base_h: i64,
    /// coeffs[j] is the coefficient of tau^((base_h + j * step)/2).
    pub coeffs: Vec<ParamPoly>,
    /// Exclusive truncation bound in half-units.
    pub trunc_h: i64,
    pub t0: SingularPoint,
}

impl PSeries {
    fn step(&self) -> i64 {
        (2 / self.q) as i64
    }

    pub fn zero(params: &ParamList, field: &FieldRef, q: u8, trunc_h: i64) -> Self {
        PSeries {
            params: params.clone(),
            field: field.clone(),
            q,
            base_h: trunc_h,
            coeffs: Vec::new(),
            trunc_h,
            t0: SingularPoint::Symbolic,
        }
    }

    /// Single term c * tau^(exp_h / 2).
    pub fn monomial(c: ParamPoly, q: u8, exp_h: i64, trunc_h: i64) -> Self {
        let mut s = PSeries {
            params: c.params.clone(),
            field: c.field.clone(),
            q,
            base_h: exp_h,
            coeffs: vec![c],
            trunc_h,
            t0: SingularPoint::Symbolic,
        };
        s.normalize();
        s
    }

    pub fn from_coeffs(
        params: &ParamList,
        field: &FieldRef,
        q: u8,
        base_h: i64,
        coeffs: Vec<ParamPoly>,
        trunc_h: i64,
    ) -> Self {
        let mut s = PSeries {
            params: params.clone(),
            field: field.clone(),
            q,
            base_h,
            coeffs,
            trunc_h,
            t0: SingularPoint::Symbolic,
        };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let step = self.step();
        while self.coeffs.first().map_or(false, ParamPoly::is_zero) {
            self.coeffs.remove(0);
            self.base_h += step;
        }
        while !self.coeffs.is_empty()
            && self.base_h + (self.coeffs.len() as i64 - 1) * step >= self.trunc_h
        {
            self.coeffs.pop();
        }
        while self.coeffs.last().map_or(false, ParamPoly::is_zero) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.base_h = self.trunc_h;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Valuation in half-units (None for the zero series).
    pub fn val_h(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.base_h)
        }
    }

    fn val_or_trunc(&self) -> i64 {
        self.val_h().unwrap_or(self.trunc_h)
    }

    pub fn exp_of(&self, j: usize) -> Rat {
        Rat::new(BigInt::from(self.base_h + j as i64 * self.step()), BigInt::from(2))
    }

    pub fn trunc_exp(&self) -> Rat {
        Rat::new(BigInt::from(self.trunc_h), BigInt::from(2))
    }

    /// Coefficient at an exact exponent; None when at/past truncation,
    /// zero when on a grid hole below it.
    pub fn coeff_at(&self, exp: &Rat) -> Option<ParamPoly> {
        let h = exp * Rat::from_integer(BigInt::from(2));
        if !h.denom().is_one() {
            return None;
        }
        let h = h.numer().to_i64()?;
        if h >= self.trunc_h {
            return None;
        }
        let step = self.step();
        let off = h - self.base_h;
        if off < 0 || off % step != 0 {
            return Some(ParamPoly::zero(&self.params, &self.field));
        }
        let j = (off / step) as usize;
        if j >= self.coeffs.len() {
            return Some(ParamPoly::zero(&self.params, &self.field));
        }
        Some(self.coeffs[j].clone())
    }

    /// Refine the grid to q = 2 (half-integer steps).
    pub fn refined(&self) -> PSeries {
        if self.q == 2 {
            return self.clone();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() * 2);
        for c in &self.coeffs {
            coeffs.push(c.clone());
            coeffs.push(ParamPoly::zero(&self.params, &self.field));
        }
        let mut s = PSeries {
            params: self.params.clone(),
            field: self.field.clone(),
            q: 2,
            base_h: self.base_h,
            coeffs,
            trunc_h: self.trunc_h,
            t0: self.t0.clone(),
        };
        s.normalize();
        s
    }

    fn commonize(a: &PSeries, b: &PSeries) -> (PSeries, PSeries) {
        if a.q == b.q && (a.q == 2 || (a.base_h - b.base_h) % 2 == 0 || a.is_zero() || b.is_zero())
        {
            (a.clone(), b.clone())
        } else {
            (a.refined(), b.refined())
        }
    }

    pub fn add(&self, o: &PSeries) -> Result<PSeries, Error> {
        let (a, b) = Self::commonize(self, o);
        let trunc_h = a.trunc_h.min(b.trunc_h);
        if a.is_zero() && b.is_zero() {
            return Ok(PSeries::zero(&a.params, &a.field, a.q.max(b.q), trunc_h));
        }
        if a.is_zero() {
            let mut s = b.truncate_to(trunc_h);
            s.t0 = self.t0.clone();
            return Ok(s);
        }
        if b.is_zero() {
            let mut s = a.truncate_to(trunc_h);
            s.t0 = self.t0.clone();
            return Ok(s);
        }
        let q = a.q;
        let step = (2 / q) as i64;
        let base = a.base_h.min(b.base_h).min(trunc_h);
        let len = ((trunc_h - base).max(0) as usize).div_ceil(step as usize);
        let mut coeffs = vec![ParamPoly::zero(&a.params, &a.field); len];
        for src in [&a, &b] {
            for (j, c) in src.coeffs.iter().enumerate() {
                let h = src.base_h + j as i64 * step;
                if h >= trunc_h {
                    break;
                }
                debug_assert_eq!((h - base) % step, 0);
                let idx = ((h - base) / step) as usize;
                coeffs[idx] = coeffs[idx].add(c)?;
            }
        }
        let mut s = PSeries {
            params: a.params.clone(),
            field: a.field.clone(),
            q,
            base_h: base,
            coeffs,
            trunc_h,
            t0: self.t0.clone(),
        };
        s.normalize();
        Ok(s)
    }

    pub fn neg(&self) -> PSeries {
        PSeries {
            params: self.params.clone(),
            field: self.field.clone(),
            q: self.q,
            base_h: self.base_h,
            coeffs: self.coeffs.iter().map(ParamPoly::neg).collect(),
            trunc_h: self.trunc_h,
            t0: self.t0.clone(),
        }
    }

    pub fn sub(&self, o: &PSeries) -> Result<PSeries, Error> {
        self.add(&o.neg())
    }

    /// Product; the truncation follows min(ord_a + val_b, ord_b + val_a).
    pub fn mul(&self, o: &PSeries) -> Result<PSeries, Error> {
        let (a, b) = Self::commonize(self, o);
        let trunc_h = (a.trunc_h + b.val_or_trunc()).min(b.trunc_h + a.val_or_trunc());
        if a.is_zero() || b.is_zero() {
            return Ok(PSeries::zero(&a.params, &a.field, a.q.max(b.q), trunc_h));
        }
        let q = a.q.max(b.q);
        let step = (2 / q) as i64;
        let base = a.base_h + b.base_h;
        let len = ((trunc_h - base).max(0) as usize).div_ceil(step as usize);
        let mut coeffs = vec![ParamPoly::zero(&a.params, &a.field); len];
        let astep = a.step();
        let bstep = b.step();
        for (i, ca) in a.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (j, cb) in b.coeffs.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                let h = a.base_h + i as i64 * astep + b.base_h + j as i64 * bstep;
                if h >= trunc_h {
                    break;
                }
                let idx = ((h - base) / step) as usize;
                coeffs[idx] = coeffs[idx].add(&ca.mul(cb)?)?;
            }
        }
        let mut s = PSeries {
            params: a.params.clone(),
            field: a.field.clone(),
            q,
            base_h: base,
            coeffs,
            trunc_h,
            t0: self.t0.clone(),
        };
        s.normalize();
        Ok(s)
    }

    pub fn scale(&self, c: &ParamPoly) -> Result<PSeries, Error> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for x in &self.coeffs {
            coeffs.push(x.mul(c)?);
        }
        let mut s = PSeries {
            params: self.params.clone(),
            field: self.field.clone(),
            q: self.q,
            base_h: self.base_h,
            coeffs,
            trunc_h: self.trunc_h,
            t0: self.t0.clone(),
        };
        s.normalize();
        Ok(s)
    }

    pub fn scale_alg(&self, c: &AlgScalar) -> Result<PSeries, Error> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for x in &self.coeffs {
            coeffs.push(x.scale(c)?);
        }
        let mut s = PSeries {
            params: self.params.clone(),
            field: self.field.clone(),
            q: self.q,
            base_h: self.base_h,
            coeffs,
            trunc_h: self.trunc_h,
            t0: self.t0.clone(),
        };
        s.normalize();
        Ok(s)
    }

    pub fn scale_rat(&self, r: &Rat) -> PSeries {
        let mut s = PSeries {
            params: self.params.clone(),
            field: self.field.clone(),
            q: self.q,
            base_h: self.base_h,
            coeffs: self.coeffs.iter().map(|c| c.scale_rat(r)).collect(),
            trunc_h: self.trunc_h,
            t0: self.t0.clone(),
        };
        s.normalize();
        s
    }

    /// Multiply by tau^(shift_h / 2).
    pub fn shift(&self, shift_h: i64) -> PSeries {
        let mut s = self.clone();
        s.base_h += shift_h;
        s.trunc_h += shift_h;
        if shift_h % s.step() != 0 {
            s = s.refined();
        }
        s
    }

    pub fn truncate_to(&self, new_trunc_h: i64) -> PSeries {
        let mut s = self.clone();
        if new_trunc_h < s.trunc_h {
            s.trunc_h = new_trunc_h;
            s.normalize();
        }
        s
    }

    /// n-th derivative (n in {1, 2, 4} per the engine contract).
    pub fn diff(&self, n: u32) -> Result<PSeries, Error> {
        if !matches!(n, 1 | 2 | 4) {
            return Err(Error::Precondition(format!("derivative order {n} not in {{1,2,4}}")));
        }
        let mut s = self.clone();
        for _ in 0..n {
            s = s.diff_once();
        }
        Ok(s)
    }

    fn diff_once(&self) -> PSeries {
        let step = self.step();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (j, c) in self.coeffs.iter().enumerate() {
            let e = Rat::new(BigInt::from(self.base_h + j as i64 * step), BigInt::from(2));
            coeffs.push(c.scale_rat(&e));
        }
        let mut s = PSeries {
            params: self.params.clone(),
            field: self.field.clone(),
            q: self.q,
            base_h: self.base_h - 2,
            coeffs,
            trunc_h: self.trunc_h - 2,
            t0: self.t0.clone(),
        };
        s.normalize();
        s
    }

    /// Re-express all coefficients through a field homomorphism.
    pub fn rebase(&self, map: &FieldMap) -> Result<PSeries, Error> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            coeffs.push(c.rebase(map)?);
        }
        Ok(PSeries {
            params: self.params.clone(),
            field: map.to.clone(),
            q: self.q,
            base_h: self.base_h,
            coeffs,
            trunc_h: self.trunc_h,
            t0: self.t0.clone(),
        })
    }

    /// Bind parameters in every coefficient.
    pub fn bind(&self, bindings: &BTreeMap<String, AlgScalar>) -> Result<PSeries, Error> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            coeffs.push(c.bind(bindings)?);
        }
        let mut s = PSeries {
            params: self.params.clone(),
            field: self.field.clone(),
            q: self.q,
            base_h: self.base_h,
            coeffs,
            trunc_h: self.trunc_h,
            t0: self.t0.clone(),
        };
        s.normalize();
        Ok(s)
    }

    /// Series inverse 1/self; the leading coefficient must be an
    /// invertible parameter-free constant.
    pub fn inv(&self) -> Result<PSeries, Error> {
        let lead = self
            .coeffs
            .first()
            .ok_or_else(|| Error::Series("inverse of the zero series".into()))?;
        let c = lead
            .as_constant()
            .ok_or_else(|| Error::Series("inverse needs a parameter-free leading coefficient".into()))?;
        let cinv = c.inv()?;
        let step = self.step();
        let order = ((self.trunc_h - self.base_h) / step) as usize;
        // self = c tau^e (1 + v); 1/self = c^-1 tau^-e (1 - v + v^2 - ...)
        let mut v = vec![ParamPoly::zero(&self.params, &self.field); order];
        for j in 1..self.coeffs.len().min(order) {
            v[j] = self.coeffs[j].scale(&cinv)?;
        }
        let mut w = vec![ParamPoly::zero(&self.params, &self.field); order];
        w[0] = ParamPoly::constant(&self.params, AlgScalar::one(&self.field));
        for k in 1..order {
            let mut acc = ParamPoly::zero(&self.params, &self.field);
            for j in 1..=k {
                if !v[j].is_zero() && !w[k - j].is_zero() {
                    acc = acc.add(&v[j].mul(&w[k - j])?)?;
                }
            }
            w[k] = acc.neg();
        }
        let mut coeffs = Vec::with_capacity(order);
        for item in w {
            coeffs.push(item.scale(&cinv)?);
        }
        let mut s = PSeries {
            params: self.params.clone(),
            field: self.field.clone(),
            q: self.q,
            base_h: -self.base_h,
            coeffs,
            trunc_h: -self.base_h + (self.trunc_h - self.base_h),
            t0: self.t0.clone(),
        };
        s.normalize();
        Ok(s)
    }

    /// Integer power (k >= 1).
    pub fn powi(&self, k: u32) -> Result<PSeries, Error> {
        assert!(k >= 1);
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Square root. The leading coefficient must be a parameter-free
    /// constant whose root the scalar kernel can express; the leading
    /// exponent must halve onto the half-integer grid. Returns the root
    /// series and the map from the old field into the result's field.
    pub fn sqrt(&self, branch: &Branch) -> Result<(PSeries, FieldMap), Error> {
        let s2 = self.refined();
        let lead = s2
            .coeffs
            .first()
            .ok_or_else(|| Error::Series("square root of the zero series".into()))?;
        let c = lead.as_constant().ok_or_else(|| {
            Error::Series("leading coefficient contains free parameters; root is not polynomial".into())
        })?;
        if s2.base_h % 2 != 0 {
            return Err(Error::Series(format!(
                "leading exponent {} does not halve onto the half-integer grid",
                s2.exp_of(0)
            )));
        }
        let (root, root_field) = alg_root(&c, 2, branch)?;
        let new_field = root_field;
        let (map, root) = match field_embedding_map(&s2.field, &new_field) {
            Ok(m) => (m, root),
            Err(_) => {
                // quadratic join: sqrt(m_from) and sqrt(m_to) in one field
                use crate::field::{join_quadratic, GeneratorKind};
                let base_of = |f: &FieldRef| -> Option<Rat> {
                    match &f.kind {
                        GeneratorKind::Binomial { n: 2, base } => Some(base.clone()),
                        _ => None,
                    }
                };
                let mf = base_of(&s2.field).ok_or_else(|| {
                    Error::FieldMismatch("square-root join needs quadratic generators".into())
                })?;
                let mt = base_of(&new_field).ok_or_else(|| {
                    Error::FieldMismatch("square-root join needs quadratic generators".into())
                })?;
                let adjoin_i = s2.field.adjoin_i || new_field.adjoin_i;
                let (jf, sm, st) = join_quadratic(&mf, &mt, adjoin_i)?;
                let map = FieldMap::new(&s2.field, &jf, sm)?;
                let rmap = FieldMap::new(&new_field, &jf, st)?;
                (map, rmap.apply(&root)?)
            }
        };
        let sr = s2.rebase(&map)?;
        let root_inv_sq = root.mul(&root)?.inv()?;
        let order = (sr.trunc_h - sr.base_h) as usize;
        // v = self / (c tau^e) - 1
        let mut v = vec![ParamPoly::zero(&sr.params, &sr.field); order];
        for j in 1..sr.coeffs.len().min(order) {
            v[j] = sr.coeffs[j].scale(&root_inv_sq)?;
        }
        // s = sqrt(1 + v): s_0 = 1, s_k = (v_k - sum_{0<j<k} s_j s_{k-j}) / 2
        let half = Rat::new(BigInt::from(1), BigInt::from(2));
        let mut sq = vec![ParamPoly::zero(&sr.params, &sr.field); order];
        sq[0] = ParamPoly::constant(&sr.params, AlgScalar::one(&sr.field));
        for k in 1..order {
            let mut acc = v[k].clone();
            for j in 1..k {
                if !sq[j].is_zero() && !sq[k - j].is_zero() {
                    acc = acc.sub(&sq[j].mul(&sq[k - j])?)?;
                }
            }
            sq[k] = acc.scale_rat(&half);
        }
        let mut coeffs = Vec::with_capacity(order);
        for item in sq {
            coeffs.push(item.scale(&root)?);
        }
        let mut out = PSeries {
            params: sr.params.clone(),
            field: map.to.clone(),
            q: 2,
            base_h: sr.base_h / 2,
            coeffs,
            trunc_h: sr.base_h / 2 + (sr.trunc_h - sr.base_h),
            t0: sr.t0.clone(),
        };
        out.normalize();
        Ok((out, map))
    }

    /// y^(3/2) or y^(5/2) via the square root: sqrt(y)^(2 exponent).
    pub fn compose_halfpower(&self, exponent: &Rat, branch: &Branch) -> Result<(PSeries, FieldMap), Error> {
        let twice = exponent * Rat::from_integer(BigInt::from(2));
        if !twice.denom().is_one() {
            return Err(Error::Precondition(format!("exponent {exponent} is not a half-integer")));
        }
        let k = twice
            .numer()
            .to_u32()
            .ok_or_else(|| Error::Precondition("exponent out of range".into()))?;
        let (rho, map) = self.sqrt(branch)?;
        Ok((rho.powi(k)?, map))
    }

    /// Horner-style numeric evaluation at tau (the offset from the
    /// singular point), with a last-term tail estimate. Half-integer
    /// exponents use the principal branch of tau^(1/2).
    pub fn eval(
        &self,
        tau: &CBig,
        bindings: &BTreeMap<String, AlgScalar>,
        prec: u32,
    ) -> Result<(CBig, DyFloat), Error> {
        if tau.is_zero() {
            return Err(Error::EvalAtSingularity);
        }
        let bound = self.bind(bindings)?;
        for c in &bound.coeffs {
            if c.as_constant().is_none() {
                return Err(Error::UnboundParameter(
                    c.used_params().first().cloned().unwrap_or_default(),
                ));
            }
        }
        if bound.is_zero() {
            return Ok((CBig::zero(prec), DyFloat::zero()));
        }
        let w = tau.sqrt(); // tau^(1/2), principal
        let step = bound.step();
        let u = if step == 2 { tau.clone() } else { w.clone() };
        let mut acc = CBig::zero(prec);
        for c in bound.coeffs.iter().rev() {
            acc = acc.mul(&u);
            let v = c.as_constant().unwrap().embed(prec);
            acc = acc.add(&v);
        }
        let lead_pow = pow_cbig(&w, bound.base_h, prec);
        let value = acc.mul(&lead_pow);
        // tail estimate: |last stored term| at |tau|
        let (j, last) = bound
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .find(|(_, c)| !c.is_zero())
            .map(|(j, c)| (j, c.as_constant().unwrap()))
            .unwrap();
        let tail = last
            .embed(prec)
            .abs_upper()
            .mul(&pow_cbig(&w, bound.base_h + j as i64 * step, prec).abs_upper());
        Ok((value, tail))
    }

    /// First exponent strictly below truncation with a nonzero coefficient.
    pub fn first_nonzero(&self) -> Option<(Rat, ParamPoly)> {
        self.coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_zero())
            .map(|(j, c)| (self.exp_of(j), c.clone()))
    }

    pub fn eq_through_common_trunc(&self, o: &PSeries) -> Result<bool, Error> {
        Ok(self.sub(o)?.is_zero())
    }
}

fn pow_cbig(w: &CBig, k: i64, prec: u32) -> CBig {
    if k == 0 {
        return CBig::from_rats(&Rat::one(), &Rat::zero(), prec);
    }
    let p = w.powi(k.unsigned_abs() as u32);
    if k > 0 {
        p
    } else {
        CBig::from_rats(&Rat::one(), &Rat::zero(), prec).div(&p)
    }
}

/// Identity-or-inclusion map between the coefficient fields produced by
/// `alg_root`: identical fields, rational into anything, or a binomial
/// tower collapse theta_from = theta_to^(deg_to/deg_from).
pub fn field_embedding_map(from: &FieldRef, to: &FieldRef) -> Result<FieldMap, Error> {
    use crate::field::{fields_equal, GeneratorKind};
    if std::sync::Arc::ptr_eq(from, to) || fields_equal(from, to) {
        return FieldMap::new(from, to, AlgScalar::generator(to));
    }
    if from.is_rational() {
        return FieldMap::new(from, to, AlgScalar::zero(to));
    }
    if let (GeneratorKind::Binomial { n: nf, base: bf }, GeneratorKind::Binomial { n: nt, base: bt }) =
        (&from.kind, &to.kind)
    {
        if bf == bt && nt % nf == 0 {
            let image = AlgScalar::generator(to).pow(nt / nf)?;
            return FieldMap::new(from, to, image);
        }
    }
    Err(Error::FieldMismatch("no embedding between the coefficient fields".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::NumberField;
    use crate::parampoly::{empty_params, params_of};
    use crate::rat::{rat, rat_int};

    fn qf() -> FieldRef {
        NumberField::rationals(false)
    }

    fn cpoly(field: &FieldRef, r: Rat) -> ParamPoly {
        ParamPoly::constant_rat(&empty_params(), field, r)
    }

    #[test]
    fn mul_truncation_bookkeeping() {
        // (t^-2) * (t^-2) = t^-4 with the order rule (h-units: exp -4, trunc 10)
        let f = qf();
        let a = PSeries::monomial(cpoly(&f, rat_int(1)), 1, -4, 10);
        let p = a.mul(&a).unwrap();
        assert_eq!(p.base_h, -8);
        assert_eq!(p.trunc_h, 6); // min(10 + (-4), 10 + (-4))
        assert_eq!(
            p.coeff_at(&rat(-4, 1)).unwrap().as_constant().unwrap().as_rat(),
            Some(rat_int(1))
        );
    }

    #[test]
    fn mixed_base_parity_refines() {
        // x-series style: base -3/2 with integer steps, plus an integer series
        let f = qf();
        let x = PSeries::monomial(cpoly(&f, rat_int(1)), 1, -3, 7); // t^(-3/2)
        let y = PSeries::monomial(cpoly(&f, rat_int(2)), 1, -4, 6); // 2 t^(-2)
        assert_eq!(x.exp_of(0), rat(-3, 2));
        let s = x.add(&y).unwrap();
        assert_eq!(s.q, 2);
        assert_eq!(s.coeff_at(&rat(-2, 1)).unwrap().as_constant().unwrap().as_rat(), Some(rat_int(2)));
        assert_eq!(s.coeff_at(&rat(-3, 2)).unwrap().as_constant().unwrap().as_rat(), Some(rat_int(1)));
        // product stays on the integer-step lattice with half base
        let p = x.mul(&x).unwrap();
        assert_eq!(p.base_h, -6);
        assert_eq!(p.q, 1);
    }

    #[test]
    fn diff_power_rule() {
        let f = qf();
        // d^2/dt^2 (t^-2) = 6 t^-4
        let a = PSeries::monomial(cpoly(&f, rat_int(1)), 1, -4, 10);
        let d = a.diff(2).unwrap();
        assert_eq!(d.base_h, -8);
        assert_eq!(d.coeffs[0].as_constant().unwrap().as_rat(), Some(rat_int(6)));
        // d^2/dt^2 (-15/8 t^-2) = -45/4 t^-4
        let b = PSeries::monomial(cpoly(&f, rat(-15, 8)), 1, -4, 10);
        let db = b.diff(2).unwrap();
        assert_eq!(db.coeffs[0].as_constant().unwrap().as_rat(), Some(rat(-45, 4)));
        // half-integer: d^2/dt^2 (c t^(-3/2)) = 15/4 c t^(-7/2)
        let c = PSeries::monomial(cpoly(&f, rat_int(1)), 1, -3, 9);
        let dc = c.diff(2).unwrap();
        assert_eq!(dc.exp_of(0), rat(-7, 2));
        assert_eq!(dc.coeffs[0].as_constant().unwrap().as_rat(), Some(rat(15, 4)));
        assert!(matches!(a.diff(3), Err(Error::Precondition(_))));
    }

    #[test]
    fn sqrt_of_t_squared() {
        let f = qf();
        let a = PSeries::monomial(cpoly(&f, rat_int(1)), 1, 4, 16);
        let (r, _) = a.sqrt(&Branch::Principal).unwrap();
        assert_eq!(r.exp_of(0), rat_int(1));
        let back = r.mul(&r).unwrap();
        assert!(back.sub(&a.refined().truncate_to(back.trunc_h)).unwrap().is_zero());
    }

    #[test]
    fn sqrt_newton_consistency() {
        // sqrt(1 + t + t^2/3) squared reproduces the input through truncation
        let f = qf();
        let ps = empty_params();
        let a = PSeries::from_coeffs(
            &ps,
            &f,
            1,
            0,
            vec![cpoly(&f, rat_int(1)), cpoly(&f, rat_int(1)), cpoly(&f, rat(1, 3))],
            14,
        );
        let (r, _) = a.sqrt(&Branch::Principal).unwrap();
        let sq = r.mul(&r).unwrap();
        let diff = sq.sub(&a.refined().truncate_to(sq.trunc_h)).unwrap();
        assert!(diff.is_zero(), "sqrt^2 - input = {:?}", diff.first_nonzero());
    }

    #[test]
    fn sqrt_with_parameter_leading_is_rejected() {
        let f = NumberField::binomial(2, rat_int(14), false).unwrap();
        let ps = params_of(&["D1"]);
        let lead = ParamPoly::param(&ps, &f, "D1").unwrap();
        let a = PSeries::monomial(lead, 1, 4, 16);
        assert!(matches!(a.sqrt(&Branch::Principal), Err(Error::Series(_))));
    }

    #[test]
    fn halfpower_composition() {
        let f = qf();
        // y = t^2 -> y^(3/2) = t^3
        let y = PSeries::monomial(cpoly(&f, rat_int(1)), 1, 4, 18);
        let (p, _) = y.compose_halfpower(&rat(3, 2), &Branch::Principal).unwrap();
        assert_eq!(p.exp_of(0), rat_int(3));
        // (y^(3/2))^2 = y^3 through truncation
        let cube = y.powi(3).unwrap();
        let sq = p.mul(&p).unwrap();
        let d = sq.sub(&cube.refined().truncate_to(sq.trunc_h)).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn eval_basics() {
        let f = qf();
        let ps = empty_params();
        let zero = PSeries::zero(&ps, &f, 1, 20);
        let tau = CBig::from_rats(&rat(1, 2), &rat_int(0), 128);
        let (v, tail) = zero.eval(&tau, &BTreeMap::new(), 128).unwrap();
        assert!(v.is_zero() && tail.is_zero());
        // constant series -15/8 at tau=2 -> -1.875
        let c = PSeries::monomial(cpoly(&f, rat(-15, 8)), 1, 0, 8);
        let t2 = CBig::from_rats(&rat_int(2), &rat_int(0), 128);
        let (v, _) = c.eval(&t2, &BTreeMap::new(), 128).unwrap();
        assert_eq!(v.re.to_rat(), rat(-15, 8));
        // singular point evaluation errors
        let t0 = CBig::zero(128);
        assert!(matches!(c.eval(&t0, &BTreeMap::new(), 128), Err(Error::EvalAtSingularity)));
    }

    #[test]
    fn eval_halfinteger_branch() {
        // t^(1/2) at tau = -1 (principal): i
        let f = qf();
        let s = PSeries::monomial(cpoly(&f, rat_int(1)), 2, 1, 9);
        let tau = CBig::from_rats(&rat_int(-1), &rat_int(0), 96);
        let (v, _) = s.eval(&tau, &BTreeMap::new(), 96).unwrap();
        assert!(v.re.to_f64().abs() < 1e-20);
        assert!((v.im.to_f64() - 1.0).abs() < 1e-20);
    }

    #[test]
    fn leibniz_rule_exact() {
        let f = qf();
        let ps = empty_params();
        let a = PSeries::from_coeffs(
            &ps,
            &f,
            1,
            -4,
            vec![cpoly(&f, rat(3, 2)), cpoly(&f, rat_int(0)), cpoly(&f, rat(-1, 5))],
            8,
        );
        let b = PSeries::from_coeffs(
            &ps,
            &f,
            1,
            -2,
            vec![cpoly(&f, rat(2, 7)), cpoly(&f, rat_int(4))],
            6,
        );
        let lhs = a.mul(&b).unwrap().diff(1).unwrap();
        let rhs = a
            .diff(1)
            .unwrap()
            .mul(&b)
            .unwrap()
            .add(&a.mul(&b.diff(1).unwrap()).unwrap())
            .unwrap();
        let d = lhs.sub(&rhs.truncate_to(lhs.trunc_h)).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn inverse_series() {
        let f = qf();
        let ps = empty_params();
        let a = PSeries::from_coeffs(
            &ps,
            &f,
            1,
            2,
            vec![cpoly(&f, rat_int(2)), cpoly(&f, rat_int(1)), cpoly(&f, rat(1, 4))],
            14,
        );
        let inv = a.inv().unwrap();
        let prod = a.mul(&inv).unwrap();
        let one = PSeries::monomial(cpoly(&f, rat_int(1)), 1, 0, prod.trunc_h);
        assert!(prod.sub(&one).unwrap().is_zero());
    }
}
