//! Series reversion: univariate Lagrange inversion and mirror-shaped fixed points.

use std::sync::Arc;

use num_traits::{One, Zero};

use super::{PuiseuxSeries, Roster, SeriesError, Substitution};
use crate::exact_math::Rational;

/// Compositional inverse of a univariate `s` with `s(0) = 0` and `s'(0) ≠ 0`, returned in
/// the single variable of `out`; `s(f(t)) = t` through the order of `s`.
pub fn lagrange_invert(s: &PuiseuxSeries, out: &Arc<Roster>) -> Result<PuiseuxSeries, SeriesError> {
    if s.roster.len() != 1 || out.len() != 1 {
        return Err(SeriesError::RosterMismatch);
    }
    if !s.constant_term().is_zero() {
        return Err(SeriesError::NonzeroConstantInner);
    }
    let denom = i64::from(s.roster.vars[0].denom);
    let w = s.roster.int_weights[0] * denom;
    let order = s.order.ok_or(SeriesError::UnboundedOrder)?;
    if w <= 0 {
        return Err(SeriesError::NotMirrorShaped("variable has zero weight".into()));
    }
    let n = usize::try_from(order.div_euclid(w)).map_err(|_| SeriesError::ZeroLinearTerm)?;
    let mut a = vec![Rational::zero(); n + 2];
    for (k, c) in &s.terms {
        if k[0] < 0 || k[0] % denom != 0 {
            return Err(SeriesError::FormalExponent(s.roster.vars[0].name.clone()));
        }
        let e = usize::try_from(k[0] / denom).expect("nonnegative");
        if e <= n {
            a[e] = c.clone();
        }
    }
    if n == 0 {
        return Ok(PuiseuxSeries::zero(out, Some(Rational::zero())));
    }
    if a[1].is_zero() {
        return Err(SeriesError::ZeroLinearTerm);
    }
    // h = z / s(z) as a dense series in z, known through z^(n-1).
    let b: Vec<Rational> = (0..n).map(|i| a[i + 1].clone()).collect();
    let mut h = vec![Rational::zero(); n];
    h[0] = Rational::one() / &b[0];
    for i in 1..n {
        let mut acc = Rational::zero();
        for j in 1..=i {
            acc += &b[j] * &h[i - j];
        }
        h[i] = -acc / &b[0];
    }
    let mut power = vec![Rational::zero(); n];
    power[0] = Rational::one();
    let out_denom = i64::from(out.vars[0].denom);
    let mut result = PuiseuxSeries::zero(out, None);
    for k in 1..=n {
        power = dense_mul(&power, &h);
        let coef = &power[k - 1] / Rational::from_integer((k as i64).into());
        result.insert(vec![k as i64 * out_denom], coef);
    }
    let out_order = out.from_units(n as i64 * out.int_weights[0] * out_denom);
    Ok(result.truncate(&out_order))
}

fn dense_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len();
    let mut c = vec![Rational::zero(); n];
    for i in 0..n {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..n - i {
            c[i + j] += &a[i] * &b[j];
        }
    }
    c
}

/// Map from source coordinates to target coordinates of the same shape: for an
/// exponentiated variable `log A_i = log B_i + components[i]`, for a formal one
/// `A_i = components[i]`. Components are series in the source variables.
#[derive(Debug, Clone)]
pub struct MirrorShapedMap {
    pub source: Arc<Roster>,
    pub target: Arc<Roster>,
    pub components: Vec<PuiseuxSeries>,
}

/// Inverse of a [`MirrorShapedMap`] as series in the target variables, with the same
/// conventions: `log B_i = log A_i + components[i]` or `B_i = components[i]`.
#[derive(Debug, Clone)]
pub struct InverseMap {
    pub source: Arc<Roster>,
    pub target: Arc<Roster>,
    pub components: Vec<PuiseuxSeries>,
    pub iterations: usize,
}

impl MirrorShapedMap {
    fn check(&self) -> Result<i64, SeriesError> {
        let s = &self.source;
        let t = &self.target;
        let same = s.len() == t.len()
            && s.vars.iter().zip(&t.vars).all(|(a, b)| a.formal == b.formal && a.denom == b.denom && a.weight == b.weight);
        if !same || self.components.len() != s.len() {
            return Err(SeriesError::RosterMismatch);
        }
        let mut order: Option<i64> = None;
        for (i, c) in self.components.iter().enumerate() {
            if c.roster.as_ref() != s.as_ref() {
                return Err(SeriesError::RosterMismatch);
            }
            let o = c.order.ok_or(SeriesError::UnboundedOrder)?;
            order = Some(order.map_or(o, |x: i64| x.min(o)));
            if !c.constant_term().is_zero() {
                return Err(SeriesError::NotMirrorShaped(format!("component {i} has a constant term")));
            }
            if s.vars[i].formal {
                let lead = PuiseuxSeries::var(s, i, None);
                let linear = lead.raw_terms().keys().next().cloned().expect("variable term");
                if c.raw_terms().get(&linear).map_or(true, |v| !v.is_one()) {
                    return Err(SeriesError::NotMirrorShaped(format!(
                        "{} does not start with {}",
                        t.vars[i].name, s.vars[i].name
                    )));
                }
            }
        }
        order.ok_or(SeriesError::UnboundedOrder)
    }

    /// Round trip through a candidate inverse. Exponentiated slots hold the residual
    /// `F_i(B(A)) + Φ_i(A)`, formal slots hold `G_i(B(A))`; an exact inverse gives zero and `A_i`.
    pub fn compose_with(&self, inv: &InverseMap) -> Result<Vec<PuiseuxSeries>, SeriesError> {
        let subs = inv.substitutions();
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let img = c.substitute(&subs, &self.target)?;
                if self.source.vars[i].formal {
                    Ok(img)
                } else {
                    img.add(&inv.components[i])
                }
            })
            .collect()
    }

    /// Source-side substitution `B_i ↦ image` used by the fixed-point iteration.
    fn step(&self, current: &[PuiseuxSeries], order: i64) -> Result<Vec<PuiseuxSeries>, SeriesError> {
        let subs = substitutions_for(&self.source, &self.target, current);
        let mut next = Vec::with_capacity(current.len());
        for (i, c) in self.components.iter().enumerate() {
            if self.source.vars[i].formal {
                let lead = PuiseuxSeries::var(&self.source, i, None);
                let rest = c.sub(&lead)?.substitute(&subs, &self.target)?;
                let ti = PuiseuxSeries::var(&self.target, i, None);
                next.push(ti.sub(&rest)?.truncate_units(Some(order)));
            } else {
                next.push(c.substitute(&subs, &self.target)?.neg().truncate_units(Some(order)));
            }
        }
        Ok(next)
    }
}

fn substitutions_for(source: &Arc<Roster>, target: &Arc<Roster>, comps: &[PuiseuxSeries]) -> Vec<Substitution> {
    (0..source.len())
        .map(|i| {
            if source.vars[i].formal {
                Substitution::Series(comps[i].clone())
            } else {
                let mut monomial = vec![Rational::zero(); target.len()];
                monomial[i] = Rational::one();
                Substitution::Exponential { monomial, log_factor: comps[i].clone() }
            }
        })
        .collect()
}

impl InverseMap {
    fn substitutions(&self) -> Vec<Substitution> {
        substitutions_for(&self.source, &self.target, &self.components)
    }

    /// Source variable `i` as a series in the target variables.
    pub fn value(&self, i: usize) -> Result<PuiseuxSeries, SeriesError> {
        let c = &self.components[i];
        if self.source.vars[i].formal {
            return Ok(c.clone());
        }
        let mut monomial = vec![Rational::zero(); self.target.len()];
        monomial[i] = Rational::one();
        c.exp()?.mul_monomial(&monomial, &Rational::one())
    }
}

/// Inverts a mirror-shaped map by fixed-point iteration until the truncation is stable.
pub fn multivar_invert(map: &MirrorShapedMap) -> Result<InverseMap, SeriesError> {
    let order = map.check()?;
    let t = &map.target;
    let mut current: Vec<PuiseuxSeries> = (0..t.len())
        .map(|i| {
            if t.vars[i].formal {
                PuiseuxSeries::var(t, i, None).truncate_units(Some(order))
            } else {
                PuiseuxSeries::zero(t, None).truncate_units(Some(order))
            }
        })
        .collect();
    let min_step = t.int_weights.iter().copied().filter(|w| *w > 0).min().unwrap_or(1).max(1);
    let max_iter = usize::try_from(order.max(0) / min_step).unwrap_or(0) + 3;
    for it in 1..=max_iter + 1 {
        let next = map.step(&current, order)?;
        if next == current {
            return Ok(InverseMap {
                source: map.source.clone(),
                target: map.target.clone(),
                components: current,
                iterations: it,
            });
        }
        current = next;
    }
    Err(SeriesError::NotMirrorShaped("fixed-point iteration did not stabilize".into()))
}
