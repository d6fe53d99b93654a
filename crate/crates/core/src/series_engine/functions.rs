//! exp, log, powers, composition and substitution.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};

use super::{min_order, Exp, PuiseuxSeries, Roster, SeriesError};
use crate::exact_math::Rational;

/// Image of one variable under a substitution.
#[derive(Debug, Clone)]
pub enum Substitution {
    /// `x = m · exp(L)` with `m` a monomial of the target roster.
    Exponential { monomial: Vec<Rational>, log_factor: PuiseuxSeries },
    /// `x = S`; only nonnegative integer powers of `x` may occur.
    Series(PuiseuxSeries),
}

/// Solves `deg(α) F_α = rhs(α, …)` over the monoid generated by `supp(s)`, in degree order.
fn monoid_recurrence<R>(s: &PuiseuxSeries, seed: Rational, mut rhs: R) -> Result<PuiseuxSeries, SeriesError>
where
    R: FnMut(i64, Option<&Rational>, &[(Rational, i64, Rational, i64)]) -> Rational,
{
    let order = s.order.ok_or(SeriesError::UnboundedOrder)?;
    let roster = s.roster.clone();
    let zero_exp = vec![0i64; roster.len()];
    let gens: Vec<(Exp, Rational, i64)> = s
        .terms
        .iter()
        .filter(|(k, _)| **k != zero_exp)
        .map(|(k, c)| (k.clone(), c.clone(), roster.degree(k)))
        .collect();
    if gens.iter().any(|g| g.2 <= 0) {
        return Err(SeriesError::BadConstantTerm("terms of nonpositive degree".into()));
    }
    let mut values: HashMap<Exp, Rational> = HashMap::new();
    values.insert(zero_exp.clone(), seed);
    let mut pending: BTreeSet<(i64, Exp)> = BTreeSet::new();
    let push_successors = |alpha: &Exp, d: i64, pending: &mut BTreeSet<(i64, Exp)>| {
        for (k, _, dk) in &gens {
            if d + dk <= order {
                let next: Exp = alpha.iter().zip(k).map(|(a, b)| a + b).collect();
                pending.insert((d + dk, next));
            }
        }
    };
    push_successors(&zero_exp, 0, &mut pending);
    let own: BTreeMap<&Exp, &Rational> = s.terms.iter().collect();
    while let Some((d, alpha)) = pending.pop_first() {
        let mut contributions = Vec::new();
        for (k, c, dk) in &gens {
            let rest: Exp = alpha.iter().zip(k).map(|(a, b)| a - b).collect();
            if let Some(v) = values.get(&rest) {
                contributions.push((c.clone(), *dk, v.clone(), d - dk));
            }
        }
        let value = rhs(d, own.get(&alpha).copied(), &contributions) / Rational::from_integer(d.into());
        if !value.is_zero() {
            push_successors(&alpha, d, &mut pending);
            values.insert(alpha, value);
        }
    }
    let terms = values.into_iter().collect();
    Ok(PuiseuxSeries::from_parts(roster, Some(order), terms))
}

impl PuiseuxSeries {
    pub(crate) fn truncate_units(&self, o: Option<i64>) -> Self {
        match o {
            Some(u) => {
                let ord = min_order(self.order, Some(u));
                PuiseuxSeries::from_parts(self.roster.clone(), ord, self.terms.clone())
            }
            None => self.clone(),
        }
    }

    /// `exp(s)` for `s` without constant term and with positive-degree terms only.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        if !self.constant_term().is_zero() {
            return Err(SeriesError::BadConstantTerm("exp needs a zero constant term".into()));
        }
        monoid_recurrence(self, Rational::one(), |_, _, contrib| {
            contrib
                .iter()
                .fold(Rational::zero(), |acc, (c, dk, v, _)| acc + c * v * Rational::from_integer((*dk).into()))
        })
    }

    /// `log(s)` for `s` with constant term 1.
    pub fn log(&self) -> Result<Self, SeriesError> {
        if !self.constant_term().is_one() {
            return Err(SeriesError::BadConstantTerm("log needs constant term 1".into()));
        }
        monoid_recurrence(self, Rational::zero(), |d, own, contrib| {
            let head = own.map_or_else(Rational::zero, |t| t * Rational::from_integer(d.into()));
            contrib
                .iter()
                .fold(head, |acc, (c, _, v, drest)| acc - c * v * Rational::from_integer((*drest).into()))
        })
    }

    /// `s^a` for `s` with constant term 1 and rational `a`.
    pub fn pow_rational(&self, a: &Rational) -> Result<Self, SeriesError> {
        if !self.constant_term().is_one() {
            return Err(SeriesError::BadConstantTerm("power needs constant term 1".into()));
        }
        let a = a.clone();
        monoid_recurrence(self, Rational::one(), move |_, _, contrib| {
            contrib.iter().fold(Rational::zero(), |acc, (c, dk, v, drest)| {
                let factor = &a * Rational::from_integer((*dk).into()) - Rational::from_integer((*drest).into());
                acc + c * v * factor
            })
        })
    }

    /// `outer(inner)` for a univariate `outer` with nonnegative integer exponents.
    pub fn compose(outer: &PuiseuxSeries, inner: &PuiseuxSeries) -> Result<Self, SeriesError> {
        if outer.roster.len() != 1 {
            return Err(SeriesError::RosterMismatch);
        }
        let val = inner.valuation_units();
        if !inner.constant_term().is_zero() || val.is_some_and(|v| v <= 0) {
            return Err(SeriesError::NonzeroConstantInner);
        }
        let denom = i64::from(outer.roster.vars[0].denom);
        let mut coeffs: BTreeMap<i64, Rational> = BTreeMap::new();
        for (k, c) in &outer.terms {
            if k[0] < 0 || k[0] % denom != 0 {
                return Err(SeriesError::Denominator {
                    var: outer.roster.vars[0].name.clone(),
                    exp: crate::exact_math::fmt_rational(&Rational::new(k[0].into(), denom.into())),
                    denom: 1,
                });
            }
            coeffs.insert(k[0] / denom, c.clone());
        }
        let eff = inner.effective_valuation();
        let mut bound = inner.order;
        if let Some(o) = outer.order {
            let w = outer.roster.int_weights[0] * denom;
            if w > 0 {
                let k_max = o.div_euclid(w);
                if let Some(v) = eff {
                    bound = min_order(bound, Some((k_max + 1) * v - 1));
                }
            }
        }
        let mut result = PuiseuxSeries::zero(&inner.roster, None).truncate_units(bound);
        let mut power = PuiseuxSeries::one(&inner.roster, None);
        let mut current = 0;
        for (k, c) in coeffs {
            while current < k {
                power = power.mul(inner)?.truncate_units(bound);
                current += 1;
            }
            result = result.add(&power.scale(&c))?;
        }
        Ok(result.truncate_units(bound))
    }

    /// Substitutes every variable of `self` and returns a series over `target`.
    pub fn substitute(&self, subs: &[Substitution], target: &Arc<Roster>) -> Result<Self, SeriesError> {
        if subs.len() != self.roster.len() {
            return Err(SeriesError::RosterMismatch);
        }
        let mut cache = SubstitutionCache::new(self, subs, target)?;
        let mut result = PuiseuxSeries::zero(target, None);
        let mut bound = None;
        if let Some(o) = self.order {
            if !cache.degree_nondecreasing {
                return Err(SeriesError::NonzeroConstantInner);
            }
            let o_rat = self.roster.from_units(o);
            bound = Some(target.to_units(&o_rat));
        }
        result = result.truncate_units(bound);
        let mut slack = 0i64;
        for k in self.terms.keys() {
            let shift = cache.shift_of(k);
            slack = slack.max(-target.degree(&target.encode(&shift)?));
        }
        let power_bound = bound.map(|b| b + slack);
        for (k, c) in &self.terms {
            let term = cache.image(k, bound, power_bound)?;
            result = result.add(&term.scale(c))?;
        }
        Ok(result.truncate_units(bound))
    }
}

struct SubstitutionCache<'a> {
    source: &'a PuiseuxSeries,
    subs: &'a [Substitution],
    target: Arc<Roster>,
    monomials: Vec<Vec<Rational>>,
    powers: HashMap<(usize, i64), PuiseuxSeries>,
    degree_nondecreasing: bool,
}

impl<'a> SubstitutionCache<'a> {
    fn new(source: &'a PuiseuxSeries, subs: &'a [Substitution], target: &Arc<Roster>) -> Result<Self, SeriesError> {
        let mut monomials = Vec::new();
        let mut nondecreasing = true;
        for (i, s) in subs.iter().enumerate() {
            let wvar = source.roster.vars[i].weight.clone();
            match s {
                Substitution::Exponential { monomial, log_factor } => {
                    if log_factor.roster.as_ref() != target.as_ref() {
                        return Err(SeriesError::RosterMismatch);
                    }
                    if !log_factor.constant_term().is_zero() {
                        return Err(SeriesError::BadConstantTerm("log factor has a constant term".into()));
                    }
                    let k = target.encode(monomial)?;
                    let dm = target.from_units(target.degree(&k));
                    if dm < wvar || log_factor.valuation_units().is_some_and(|v| v < 0) {
                        nondecreasing = false;
                    }
                    monomials.push(monomial.clone());
                }
                Substitution::Series(series) => {
                    if series.roster.as_ref() != target.as_ref() {
                        return Err(SeriesError::RosterMismatch);
                    }
                    if let Some(v) = series.effective_valuation() {
                        if target.from_units(v) < wvar {
                            nondecreasing = false;
                        }
                    }
                    monomials.push(vec![Rational::zero(); target.len()]);
                }
            }
        }
        Ok(SubstitutionCache {
            source,
            subs,
            target: target.clone(),
            monomials,
            powers: HashMap::new(),
            degree_nondecreasing: nondecreasing,
        })
    }

    /// Image of the `k`-th power unit of variable `i` (numerator `k` over its denominator).
    fn power(&mut self, i: usize, k: i64, bound: Option<i64>) -> Result<PuiseuxSeries, SeriesError> {
        if let Some(p) = self.powers.get(&(i, k)) {
            return Ok(p.clone());
        }
        let var = &self.source.roster.vars[i];
        let p = match &self.subs[i] {
            Substitution::Exponential { log_factor, .. } => {
                if k == 0 {
                    PuiseuxSeries::one(&self.target, None)
                } else {
                    let scaled = log_factor.scale(&Rational::new(k.signum().into(), var.denom.into()));
                    let unit = if scaled.is_zero() && scaled.order.is_none() {
                        PuiseuxSeries::one(&self.target, None)
                    } else {
                        scaled.truncate_units(bound.or(scaled.order)).exp()?
                    };
                    if k.abs() == 1 {
                        unit
                    } else {
                        let prev = self.power(i, k - k.signum(), bound)?;
                        prev.mul(&unit)?.truncate_units(bound)
                    }
                }
            }
            Substitution::Series(series) => {
                let denom = i64::from(var.denom);
                if k < 0 || k % denom != 0 {
                    return Err(SeriesError::FormalExponent(var.name.clone()));
                }
                if k == 0 {
                    PuiseuxSeries::one(&self.target, None)
                } else {
                    let prev = self.power(i, k - denom, bound)?;
                    prev.mul(series)?.truncate_units(bound)
                }
            }
        };
        self.powers.insert((i, k), p.clone());
        Ok(p)
    }

    fn shift_of(&self, k: &Exp) -> Vec<Rational> {
        let mut shift = vec![Rational::zero(); self.target.len()];
        for (i, &ki) in k.iter().enumerate() {
            if ki == 0 {
                continue;
            }
            let e = Rational::new(ki.into(), self.source.roster.vars[i].denom.into());
            for (s, m) in shift.iter_mut().zip(&self.monomials[i]) {
                *s += &e * m;
            }
        }
        shift
    }

    fn image(&mut self, k: &Exp, bound: Option<i64>, power_bound: Option<i64>) -> Result<PuiseuxSeries, SeriesError> {
        let shift = self.shift_of(k);
        let shift_units = self.target.degree(&self.target.encode(&shift)?);
        let inner = bound.map(|b| b - shift_units);
        let mut acc = PuiseuxSeries::one(&self.target, None);
        for (i, &ki) in k.iter().enumerate() {
            if ki != 0 {
                let p = self.power(i, ki, power_bound)?;
                acc = acc.mul(&p)?.truncate_units(inner);
            }
        }
        Ok(acc.mul_monomial(&shift, &Rational::one())?.truncate_units(bound))
    }
}
