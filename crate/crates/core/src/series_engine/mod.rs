//! Exact sparse multivariate Puiseux series with exponentiated and formal variables.
//!
//! Exponents of variable `i` are stored as integer numerators over the variable's
//! denominator bound. A series carries the weighted degree up to which it is known
//! (`None` for exact polynomials); products track precision from valuations so that
//! shifting by monomials never invents or loses coefficients.

mod eval;
mod functions;
mod invert;
mod serial;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::exact_math::{fmt_rational, Rational};

pub use eval::{eval_complex, Evaluation};
pub use functions::Substitution;
pub use invert::{lagrange_invert, multivar_invert, InverseMap, MirrorShapedMap};
pub use serial::SeriesJson;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("variable rosters differ")]
    RosterMismatch,
    #[error("bad constant term: {0}")]
    BadConstantTerm(String),
    #[error("inner series has a nonzero constant term or nonpositive-degree terms")]
    NonzeroConstantInner,
    #[error("series has no linear term")]
    ZeroLinearTerm,
    #[error("map is not mirror-shaped: {0}")]
    NotMirrorShaped(String),
    #[error("branch cut violation: {0}")]
    BranchCutViolation(String),
    #[error("numeric overflow during evaluation")]
    Overflow,
    #[error("exponent {exp} of {var} is incompatible with its denominator bound {denom}")]
    Denominator { var: String, exp: String, denom: u32 },
    #[error("formal variable {0} needs a nonnegative integer exponent")]
    FormalExponent(String),
    #[error("operation needs a finite truncation order")]
    UnboundedOrder,
    #[error("series schema error: {0}")]
    Schema(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Var {
    pub name: String,
    /// Formal variables (τ-type) take nonnegative integer exponents only.
    pub formal: bool,
    pub denom: u32,
    pub weight: Rational,
}

impl Var {
    pub fn exponentiated(name: &str, denom: u32) -> Self {
        Var { name: name.to_string(), formal: false, denom, weight: Rational::one() }
    }

    pub fn formal(name: &str) -> Self {
        Var { name: name.to_string(), formal: true, denom: 1, weight: Rational::one() }
    }
}

/// Ordered variable list with the integer degree scale shared by all its series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Roster {
    vars: Vec<Var>,
    /// Degrees are stored as integers in units of `1/scale`.
    scale: i64,
    int_weights: Vec<i64>,
}

impl Roster {
    pub fn new(vars: Vec<Var>) -> Arc<Roster> {
        assert!(vars.iter().all(|v| v.denom >= 1 && v.weight >= Rational::zero()));
        let per_unit: Vec<Rational> =
            vars.iter().map(|v| &v.weight / Rational::from_integer(v.denom.into())).collect();
        let scale = per_unit.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let int_weights = per_unit
            .iter()
            .map(|w| (w * Rational::from_integer(scale.clone())).to_integer().to_i64().expect("weight fits"))
            .collect();
        Arc::new(Roster { vars, scale: scale.to_i64().expect("scale fits"), int_weights })
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    fn degree(&self, exp: &[i64]) -> i64 {
        exp.iter().zip(&self.int_weights).map(|(k, w)| k * w).sum()
    }

    fn to_units(&self, x: &Rational) -> i64 {
        (x * Rational::from_integer(self.scale.into())).floor().to_integer().to_i64().expect("order fits")
    }

    fn from_units(&self, u: i64) -> Rational {
        Rational::new(u.into(), self.scale.into())
    }

    /// Integer numerators for rational exponents, checking denominators and formal rules.
    pub fn encode(&self, exps: &[Rational]) -> Result<Vec<i64>, SeriesError> {
        if exps.len() != self.vars.len() {
            return Err(SeriesError::RosterMismatch);
        }
        exps.iter()
            .zip(&self.vars)
            .map(|(e, v)| {
                let scaled = e * Rational::from_integer(v.denom.into());
                if !scaled.is_integer() {
                    return Err(SeriesError::Denominator {
                        var: v.name.clone(),
                        exp: fmt_rational(e),
                        denom: v.denom,
                    });
                }
                let k = scaled.to_integer().to_i64().ok_or(SeriesError::Overflow)?;
                if v.formal && k < 0 {
                    return Err(SeriesError::FormalExponent(v.name.clone()));
                }
                Ok(k)
            })
            .collect()
    }

    pub fn decode(&self, exp: &[i64]) -> Vec<Rational> {
        exp.iter().zip(&self.vars).map(|(&k, v)| Rational::new(k.into(), v.denom.into())).collect()
    }
}

pub(crate) type Exp = Vec<i64>;

#[derive(Clone, PartialEq, Eq)]
pub struct PuiseuxSeries {
    roster: Arc<Roster>,
    /// Known through this weighted degree (units of `1/scale`); `None` means exact.
    order: Option<i64>,
    terms: BTreeMap<Exp, Rational>,
}

impl PuiseuxSeries {
    pub fn zero(roster: &Arc<Roster>, order: Option<Rational>) -> Self {
        let order = order.map(|o| roster.to_units(&o));
        PuiseuxSeries { roster: roster.clone(), order, terms: BTreeMap::new() }
    }

    pub fn constant(roster: &Arc<Roster>, c: Rational, order: Option<Rational>) -> Self {
        let mut s = Self::zero(roster, order);
        s.insert(vec![0; roster.len()], c);
        s
    }

    pub fn one(roster: &Arc<Roster>, order: Option<Rational>) -> Self {
        Self::constant(roster, Rational::one(), order)
    }

    pub fn monomial(
        roster: &Arc<Roster>,
        exps: &[Rational],
        coef: Rational,
        order: Option<Rational>,
    ) -> Result<Self, SeriesError> {
        let k = roster.encode(exps)?;
        let mut s = Self::zero(roster, order);
        s.insert(k, coef);
        Ok(s)
    }

    /// The variable `i` itself.
    pub fn var(roster: &Arc<Roster>, i: usize, order: Option<Rational>) -> Self {
        let mut k = vec![0; roster.len()];
        k[i] = i64::from(roster.vars[i].denom);
        let mut s = Self::zero(roster, order);
        s.insert(k, Rational::one());
        s
    }

    pub(crate) fn from_parts(roster: Arc<Roster>, order: Option<i64>, terms: BTreeMap<Exp, Rational>) -> Self {
        let mut s = PuiseuxSeries { roster, order, terms: BTreeMap::new() };
        for (k, c) in terms {
            s.insert(k, c);
        }
        s
    }

    fn insert(&mut self, k: Exp, c: Rational) {
        if c.is_zero() {
            return;
        }
        if let Some(o) = self.order {
            if self.roster.degree(&k) > o {
                return;
            }
        }
        self.terms.insert(k, c);
    }

    pub fn roster(&self) -> &Arc<Roster> {
        &self.roster
    }

    pub fn order(&self) -> Option<Rational> {
        self.order.map(|o| self.roster.from_units(o))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms as (rational exponents, coefficient), sorted by degree then exponent.
    pub fn terms(&self) -> Vec<(Vec<Rational>, Rational)> {
        let mut v: Vec<(&Exp, &Rational)> = self.terms.iter().collect();
        v.sort_by(|a, b| self.roster.degree(a.0).cmp(&self.roster.degree(b.0)).then(a.0.cmp(b.0)));
        v.into_iter().map(|(k, c)| (self.roster.decode(k), c.clone())).collect()
    }

    pub(crate) fn raw_terms(&self) -> &BTreeMap<Exp, Rational> {
        &self.terms
    }

    pub fn coefficient(&self, exps: &[Rational]) -> Rational {
        match self.roster.encode(exps) {
            Ok(k) => self.terms.get(&k).cloned().unwrap_or_else(Rational::zero),
            Err(_) => Rational::zero(),
        }
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&vec![0; self.roster.len()]).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree_of(&self, exps: &[Rational]) -> Result<Rational, SeriesError> {
        let k = self.roster.encode(exps)?;
        Ok(self.roster.from_units(self.roster.degree(&k)))
    }

    /// Least weighted degree among stored terms.
    pub fn valuation(&self) -> Option<Rational> {
        self.valuation_units().map(|v| self.roster.from_units(v))
    }

    fn valuation_units(&self) -> Option<i64> {
        self.terms.keys().map(|k| self.roster.degree(k)).min()
    }

    /// Lower bound on the degree of everything not known to be zero.
    fn effective_valuation(&self) -> Option<i64> {
        match (self.valuation_units(), self.order) {
            (Some(v), Some(o)) => Some(v.min(o + 1)),
            (Some(v), None) => Some(v),
            (None, Some(o)) => Some(o + 1),
            (None, None) => None,
        }
    }

    fn check_roster(&self, other: &Self) -> Result<(), SeriesError> {
        if Arc::ptr_eq(&self.roster, &other.roster) || self.roster == other.roster {
            Ok(())
        } else {
            Err(SeriesError::RosterMismatch)
        }
    }

    /// Drops every term above `order` and lowers the known precision accordingly.
    pub fn truncate(&self, order: &Rational) -> Self {
        let o = self.roster.to_units(order);
        let new = match self.order {
            Some(cur) => cur.min(o),
            None => o,
        };
        let terms = self.terms.iter().filter(|(k, _)| self.roster.degree(k) <= new).map(|(k, c)| (k.clone(), c.clone())).collect();
        PuiseuxSeries { roster: self.roster.clone(), order: Some(new), terms }
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_roster(other)?;
        let order = min_order(self.order, other.order);
        let mut out = PuiseuxSeries { roster: self.roster.clone(), order, terms: BTreeMap::new() };
        let mut merged = self.terms.clone();
        for (k, c) in &other.terms {
            *merged.entry(k.clone()).or_insert_with(Rational::zero) += c;
        }
        for (k, c) in merged {
            out.insert(k, c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return PuiseuxSeries { roster: self.roster.clone(), order: self.order, terms: BTreeMap::new() };
        }
        let terms = self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        PuiseuxSeries { roster: self.roster.clone(), order: self.order, terms }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_roster(other)?;
        let order = product_order(self, other);
        let mut a: Vec<(i64, &Exp, &Rational)> =
            self.terms.iter().map(|(k, c)| (self.roster.degree(k), k, c)).collect();
        let mut b: Vec<(i64, &Exp, &Rational)> =
            other.terms.iter().map(|(k, c)| (self.roster.degree(k), k, c)).collect();
        a.sort_by_key(|t| t.0);
        b.sort_by_key(|t| t.0);
        let mut acc: BTreeMap<Exp, Rational> = BTreeMap::new();
        for (da, ka, ca) in &a {
            for (db, kb, cb) in &b {
                if let Some(o) = order {
                    if da + db > o {
                        break;
                    }
                }
                let k: Exp = ka.iter().zip(kb.iter()).map(|(x, y)| x + y).collect();
                let v = *ca * *cb;
                match acc.get_mut(&k) {
                    Some(slot) => *slot += v,
                    None => {
                        acc.insert(k, v);
                    }
                }
            }
        }
        Ok(PuiseuxSeries::from_parts(self.roster.clone(), order, acc))
    }

    /// Multiplies by `coef · x^exps`; precision shifts with the monomial's degree.
    pub fn mul_monomial(&self, exps: &[Rational], coef: &Rational) -> Result<Self, SeriesError> {
        let shift = self.roster.encode(exps)?;
        let dshift = self.roster.degree(&shift);
        let order = self.order.map(|o| o + dshift);
        let mut out = PuiseuxSeries { roster: self.roster.clone(), order, terms: BTreeMap::new() };
        for (k, c) in &self.terms {
            let nk: Exp = k.iter().zip(&shift).map(|(x, y)| x + y).collect();
            if nk.iter().zip(&self.roster.vars).any(|(e, v)| v.formal && *e < 0) {
                return Err(SeriesError::FormalExponent("shifted term".into()));
            }
            out.insert(nk, c * coef);
        }
        Ok(out)
    }

    /// Non-negative integer power.
    pub fn pow(&self, k: u32) -> Result<Self, SeriesError> {
        let mut result = PuiseuxSeries::one(&self.roster, None);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Keeps only terms satisfying the predicate on rational exponents.
    pub fn filter_terms<F: Fn(&[Rational]) -> bool>(&self, keep: F) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(k, _)| keep(&self.roster.decode(k)))
            .map(|(k, c)| (k.clone(), c.clone()))
            .collect();
        PuiseuxSeries { roster: self.roster.clone(), order: self.order, terms }
    }

    /// Same terms reinterpreted over an equal-shaped roster (e.g. renamed variables).
    pub fn rename(&self, roster: &Arc<Roster>) -> Result<Self, SeriesError> {
        let same_shape = roster.len() == self.roster.len()
            && roster.vars.iter().zip(&self.roster.vars).all(|(a, b)| {
                a.formal == b.formal && a.denom == b.denom && a.weight == b.weight
            });
        if !same_shape {
            return Err(SeriesError::RosterMismatch);
        }
        Ok(PuiseuxSeries { roster: roster.clone(), order: self.order, terms: self.terms.clone() })
    }

    /// Exact equality of known coefficients up to the smaller of the two orders.
    pub fn agrees_with(&self, other: &Self) -> bool {
        if self.check_roster(other).is_err() {
            return false;
        }
        let bound = min_order(self.order, other.order);
        let visible = |s: &Self| -> BTreeMap<Exp, Rational> {
            s.terms
                .iter()
                .filter(|(k, _)| bound.map_or(true, |o| s.roster.degree(k) <= o))
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect()
        };
        visible(self) == visible(other)
    }
}

fn min_order(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

fn product_order(a: &PuiseuxSeries, b: &PuiseuxSeries) -> Option<i64> {
    let va = a.effective_valuation();
    let vb = b.effective_valuation();
    let left = match (a.order, vb) {
        (Some(o), Some(v)) => Some(o + v),
        (Some(_), None) => None,
        (None, _) => None,
    };
    let right = match (b.order, va) {
        (Some(o), Some(v)) => Some(o + v),
        (Some(_), None) => None,
        (None, _) => None,
    };
    // An exact zero factor makes the product exactly zero.
    if (a.order.is_none() && a.terms.is_empty()) || (b.order.is_none() && b.terms.is_empty()) {
        return None;
    }
    min_order(left, right)
}

impl fmt::Debug for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (exps, c)) in terms.iter().enumerate() {
            let mono: Vec<String> = exps
                .iter()
                .zip(self.roster.vars())
                .filter(|(e, _)| !e.is_zero())
                .map(|(e, v)| {
                    if e.is_one() {
                        v.name.clone()
                    } else if e.is_integer() {
                        format!("{}^{}", v.name, e)
                    } else {
                        format!("{}^({})", v.name, fmt_rational(e))
                    }
                })
                .collect();
            let neg = *c < Rational::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            let sep = match (i, neg) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            write!(f, "{sep}")?;
            if mono.is_empty() {
                write!(f, "{}", fmt_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_rational(&mag), mono.join("*"))?;
            }
        }
        if let Some(o) = self.order() {
            write!(f, " + O(deg > {})", fmt_rational(&o))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_math::{int, rat};

    pub(crate) fn q_roster() -> Arc<Roster> {
        Roster::new(vec![Var::exponentiated("q", 2)])
    }

    #[test]
    fn difference_of_squares() {
        let r = q_roster();
        let o = Some(int(10));
        let q = PuiseuxSeries::var(&r, 0, o.clone());
        let one = PuiseuxSeries::one(&r, o);
        let p = one.add(&q).unwrap().mul(&one.sub(&q).unwrap()).unwrap();
        assert_eq!(p.terms(), vec![(vec![int(0)], int(1)), (vec![int(2)], int(-1))]);
    }

    #[test]
    fn half_powers_square() {
        let r = q_roster();
        let h = PuiseuxSeries::monomial(&r, &[rat(1, 2)], int(1), Some(int(10))).unwrap();
        let sq = h.mul(&h).unwrap();
        assert_eq!(sq.terms(), vec![(vec![int(1)], int(1))]);
        assert!(PuiseuxSeries::monomial(&r, &[rat(1, 3)], int(1), None).is_err());
    }

    #[test]
    fn times_zero_is_empty() {
        let r = q_roster();
        let s = PuiseuxSeries::var(&r, 0, Some(int(5)));
        assert!(s.mul(&PuiseuxSeries::zero(&r, None)).unwrap().is_zero());
    }

    #[test]
    fn roster_mismatch() {
        let a = PuiseuxSeries::one(&q_roster(), None);
        let b = PuiseuxSeries::one(&Roster::new(vec![Var::formal("t")]), None);
        assert_eq!(a.add(&b), Err(SeriesError::RosterMismatch));
    }

    #[test]
    fn precision_follows_monomial_shift() {
        let r = q_roster();
        let s = PuiseuxSeries::one(&r, Some(int(4)));
        let shifted = s.mul_monomial(&[rat(1, 2)], &int(1)).unwrap();
        assert_eq!(shifted.order(), Some(rat(9, 2)));
        let back = shifted.mul_monomial(&[rat(-1, 2)], &int(1)).unwrap();
        assert_eq!(back.order(), Some(int(4)));
    }

    #[test]
    fn display_form() {
        let r = Roster::new(vec![Var::exponentiated("q", 2), Var::formal("t")]);
        let s = PuiseuxSeries::monomial(&r, &[rat(1, 2), int(3)], rat(-1, 24), Some(int(5))).unwrap();
        assert_eq!(s.to_string(), "-1/24*q^(1/2)*t^3 + O(deg > 5)");
    }
}
