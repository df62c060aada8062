//! Polynomials in the free parameters of a series family (a2, b4, D1, D2,
//! ...) with exact number-field coefficients. Series coefficients are kept
//! in this form so resonance bookkeeping stays symbolic.

use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::Error;
use crate::field::{AlgScalar, FieldMap, FieldRef};
use crate::rat::Rat;

pub type ParamList = Arc<Vec<String>>;

/// Multivariate polynomial over AlgScalar in a fixed ordered parameter list.
/// No zero coefficients are stored; the zero polynomial has no terms.
#[derive(Clone, Debug)]
pub struct ParamPoly {
    pub params: ParamList,
    pub field: FieldRef,
    pub terms: BTreeMap<Vec<u32>, AlgScalar>,
}

impl ParamPoly {
    pub fn zero(params: &ParamList, field: &FieldRef) -> Self {
        ParamPoly { params: params.clone(), field: field.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(params: &ParamList, c: AlgScalar) -> Self {
        let field = c.field.clone();
        let mut p = ParamPoly::zero(params, &field);
        if !c.is_zero() {
            p.terms.insert(vec![0; params.len()], c);
        }
        p
    }

    pub fn constant_rat(params: &ParamList, field: &FieldRef, r: Rat) -> Self {
        Self::constant(params, AlgScalar::from_rat(field, r))
    }

    /// The bare parameter with the given name.
    pub fn param(params: &ParamList, field: &FieldRef, name: &str) -> Result<Self, Error> {
        let idx = params
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::ParamMismatch(format!("unknown parameter {name}")))?;
        let mut exp = vec![0; params.len()];
        exp[idx] = 1;
        let mut p = ParamPoly::zero(params, field);
        p.terms.insert(exp, AlgScalar::one(field));
        Ok(p)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().iter().all(|&e| e == 0))
    }

    pub fn as_constant(&self) -> Option<AlgScalar> {
        if self.terms.is_empty() {
            return Some(AlgScalar::zero(&self.field));
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn check_compat(&self, o: &Self) -> Result<(), Error> {
        if self.params != o.params && **self.params != **o.params {
            return Err(Error::ParamMismatch(format!("{:?} vs {:?}", self.params, o.params)));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, Error> {
        self.check_compat(o)?;
        let mut out = self.clone();
        for (e, c) in &o.terms {
            match out.terms.get_mut(e) {
                Some(existing) => {
                    let s = existing.add(c)?;
                    if s.is_zero() {
                        out.terms.remove(e);
                    } else {
                        *existing = s;
                    }
                }
                None => {
                    out.terms.insert(e.clone(), c.clone());
                }
            }
        }
        if out.terms.is_empty() {
            out.field = self.field.clone();
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        ParamPoly {
            params: self.params.clone(),
            field: self.field.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Result<Self, Error> {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Result<Self, Error> {
        self.check_compat(o)?;
        let mut out = ParamPoly::zero(&self.params, &self.field);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let c = ca.mul(cb)?;
                match out.terms.get_mut(&e) {
                    Some(existing) => {
                        let s = existing.add(&c)?;
                        if s.is_zero() {
                            out.terms.remove(&e);
                        } else {
                            *existing = s;
                        }
                    }
                    None => {
                        if !c.is_zero() {
                            out.terms.insert(e, c);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &AlgScalar) -> Result<Self, Error> {
        if c.is_zero() {
            return Ok(ParamPoly::zero(&self.params, &self.field));
        }
        let mut out = ParamPoly::zero(&self.params, &self.field);
        for (e, v) in &self.terms {
            out.terms.insert(e.clone(), v.mul(c)?);
        }
        Ok(out)
    }

    pub fn scale_rat(&self, r: &Rat) -> Self {
        if r.is_zero() {
            return ParamPoly::zero(&self.params, &self.field);
        }
        ParamPoly {
            params: self.params.clone(),
            field: self.field.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.scale_rat(r))).collect(),
        }
    }

    /// Substitute one parameter by a polynomial (in the same list).
    pub fn substitute(&self, name: &str, value: &ParamPoly) -> Result<Self, Error> {
        let idx = self
            .params
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::ParamMismatch(format!("unknown parameter {name}")))?;
        let mut out = ParamPoly::zero(&self.params, &self.field);
        for (e, c) in &self.terms {
            let k = e[idx];
            let mut base = e.clone();
            base[idx] = 0;
            let mut term = ParamPoly::zero(&self.params, &self.field);
            term.terms.insert(base, c.clone());
            for _ in 0..k {
                term = term.mul(value)?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Bind parameters to exact values; every remaining parameter stays
    /// symbolic. Returns an error listing missing parameters only when
    /// `complete` is set.
    pub fn bind(&self, bindings: &BTreeMap<String, AlgScalar>) -> Result<Self, Error> {
        let mut out = self.clone();
        for (name, value) in bindings {
            if out.params.iter().any(|p| p == name) {
                let v = ParamPoly::constant(&out.params, value.clone());
                out = out.substitute(name, &v)?;
            }
        }
        Ok(out)
    }

    /// Fully evaluate; errors on unbound parameters.
    pub fn eval(&self, bindings: &BTreeMap<String, AlgScalar>) -> Result<AlgScalar, Error> {
        let bound = self.bind(bindings)?;
        match bound.as_constant() {
            Some(c) => Ok(c),
            None => {
                let missing = bound
                    .terms
                    .keys()
                    .flat_map(|e| {
                        e.iter()
                            .enumerate()
                            .filter(|(_, &k)| k > 0)
                            .map(|(i, _)| bound.params[i].clone())
                    })
                    .next()
                    .unwrap_or_default();
                Err(Error::UnboundParameter(missing))
            }
        }
    }

    /// Decompose as gamma * name + rest when the polynomial is linear in
    /// `name` with a constant coefficient; rest must not contain `name`.
    pub fn linear_in(&self, name: &str) -> Option<(AlgScalar, ParamPoly)> {
        let idx = self.params.iter().position(|p| p == name)?;
        let mut gamma: Option<AlgScalar> = None;
        let mut rest = ParamPoly::zero(&self.params, &self.field);
        for (e, c) in &self.terms {
            match e[idx] {
                0 => {
                    rest.terms.insert(e.clone(), c.clone());
                }
                1 => {
                    if e.iter().enumerate().any(|(i, &k)| i != idx && k > 0) {
                        return None; // mixed term: not scalar-linear
                    }
                    if gamma.is_some() {
                        return None;
                    }
                    gamma = Some(c.clone());
                }
                _ => return None,
            }
        }
        gamma.map(|g| (g, rest))
    }

    /// Names of parameters that actually occur.
    pub fn used_params(&self) -> Vec<String> {
        let mut used = vec![false; self.params.len()];
        for e in self.terms.keys() {
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    used[i] = true;
                }
            }
        }
        self.params
            .iter()
            .zip(used)
            .filter(|(_, u)| *u)
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// Re-express every coefficient through a field homomorphism.
    pub fn rebase(&self, map: &FieldMap) -> Result<Self, Error> {
        let mut out = ParamPoly::zero(&self.params, &map.to);
        for (e, c) in &self.terms {
            let v = map.apply(c)?;
            if !v.is_zero() {
                out.terms.insert(e.clone(), v);
            }
        }
        Ok(out)
    }

    /// Rigorous upper bound of |self| when every parameter is bounded in
    /// magnitude by the given values (triangle inequality term by term).
    pub fn magnitude_bound(&self, param_bounds: &BTreeMap<String, Rat>, prec: u32) -> Result<Rat, Error> {
        let mut total = Rat::zero();
        for (e, c) in &self.terms {
            let mut factor = Rat::one();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    let b = param_bounds.get(&self.params[i]).ok_or_else(|| {
                        Error::UnboundParameter(self.params[i].clone())
                    })?;
                    for _ in 0..k {
                        factor *= b;
                    }
                }
            }
            total += c.abs_upper(prec) * factor;
        }
        Ok(total)
    }

    /// Drop a parameter that no longer occurs anywhere.
    pub fn drop_param(&self, name: &str) -> Result<Self, Error> {
        let idx = self
            .params
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::ParamMismatch(format!("unknown parameter {name}")))?;
        let new_params: ParamList =
            Arc::new(self.params.iter().filter(|p| *p != name).cloned().collect());
        let mut out = ParamPoly::zero(&new_params, &self.field);
        for (e, c) in &self.terms {
            if e[idx] != 0 {
                return Err(Error::ParamMismatch(format!("parameter {name} still occurs")));
            }
            let mut ne = e.clone();
            ne.remove(idx);
            out.terms.insert(ne, c.clone());
        }
        Ok(out)
    }

    /// Integer power (k >= 1).
    pub fn powi(&self, k: u32) -> Result<ParamPoly, Error> {
        assert!(k >= 1);
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn eq(&self, o: &Self) -> bool {
        match self.sub(o) {
            Ok(d) => d.is_zero(),
            Err(_) => false,
        }
    }
}

/// Spec operation: dispatch for +, -, x and scalar x.
pub fn parampoly_arith(p: &ParamPoly, q: &ParamPoly, op: char) -> Result<ParamPoly, Error> {
    match op {
        '+' => p.add(q),
        '-' => p.sub(q),
        '*' => p.mul(q),
        _ => Err(Error::Precondition(format!("unknown op {op:?}"))),
    }
}

pub fn empty_params() -> ParamList {
    Arc::new(Vec::new())
}

pub fn params_of(names: &[&str]) -> ParamList {
    Arc::new(names.iter().map(|s| s.to_string()).collect())
}

impl std::fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "(")?;
            let mut started = false;
            for (k, g) in c.coords.iter().enumerate() {
                if g.is_zero() {
                    continue;
                }
                if started {
                    write!(f, " + ")?;
                }
                started = true;
                if g.im.is_zero() {
                    write!(f, "{}", crate::rat::fmt_rat(&g.re))?;
                } else {
                    write!(f, "({}+{}i)", crate::rat::fmt_rat(&g.re), crate::rat::fmt_rat(&g.im))?;
                }
                if k > 0 {
                    write!(f, "*th^{k}")?;
                }
            }
            if !started {
                write!(f, "0")?;
            }
            write!(f, ")")?;
            for (i, &k) in e.iter().enumerate() {
                if k == 1 {
                    write!(f, "*{}", self.params[i])?;
                } else if k > 1 {
                    write!(f, "*{}^{}", self.params[i], k)?;
                }
            }
        }
        Ok(())
    }
}
