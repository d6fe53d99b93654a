//! Mirror map from the `1/z` coefficient of the I-function, and its inverse.

use std::sync::Arc;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::{a_roster, b_roster, i_function, ISeries, MirrorError};
use crate::exact_math::Rational;
use crate::extended_fan::ExtendedFanData;
use crate::series_engine::{multivar_invert, InverseMap, MirrorShapedMap, PuiseuxSeries, Roster};

#[derive(Debug, Clone)]
pub struct MirrorMap {
    pub order: Rational,
    pub b_roster: Arc<Roster>,
    pub a_roster: Arc<Roster>,
    /// `log q_a = log y_a + F_a(y,u)` and `τ_b = G_b(y,u)`.
    pub forward: MirrorShapedMap,
    /// `log y_a = log q_a + Φ_a(q,τ)` and `u_b = U_b(q,τ)`.
    pub inverse: InverseMap,
    /// λ-lifts of the extended vectors, for converting back to `y_b = u_b y^{λ_b}`.
    lifts: Vec<Vec<Rational>>,
}

impl MirrorMap {
    /// Adapted B-variable `i` as a series in `(q, τ)`.
    pub fn adapted_value(&self, i: usize) -> Result<PuiseuxSeries, MirrorError> {
        Ok(self.inverse.value(i)?)
    }

    /// Original coordinate `y_i` (`i < r'`) as a series in `(q, τ)`.
    pub fn original_value(&self, i: usize) -> Result<PuiseuxSeries, MirrorError> {
        let r = self.lifts.first().map_or(self.b_roster.len(), Vec::len);
        if i < r {
            return self.adapted_value(i);
        }
        let lift = &self.lifts[i - r];
        let mut log = PuiseuxSeries::zero(&self.a_roster, None);
        let mut shift = vec![Rational::zero(); self.a_roster.len()];
        for (a, l) in lift.iter().enumerate() {
            log = log.add(&self.inverse.components[a].scale(l))?;
            shift[a] = l.clone();
        }
        let factor = log.exp()?.mul_monomial(&shift, &Rational::one())?;
        Ok(self.inverse.components[i].mul(&factor)?)
    }

    /// Residuals of `q(y(q))` and `τ(y(q))`: true when both round trips are exact.
    pub fn round_trip_exact(&self) -> Result<bool, MirrorError> {
        let back = self.forward.compose_with(&self.inverse)?;
        for (i, s) in back.iter().enumerate() {
            let ok = if self.a_roster.vars()[i].formal {
                s.agrees_with(&PuiseuxSeries::var(&self.a_roster, i, None))
            } else {
                s.is_zero()
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> Value {
        let named = |roster: &Arc<Roster>, comps: &[PuiseuxSeries], prefix: &str| -> Value {
            Value::Array(
                comps
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let var = &roster.vars()[i];
                        let label = if var.formal { var.name.clone() } else { format!("{prefix}{}", var.name) };
                        json!({ "name": label, "series": s.to_json() })
                    })
                    .collect(),
            )
        };
        json!({
            "order": crate::exact_math::fmt_rational(&self.order),
            "forward": named(&self.a_roster, &self.forward.components, "log "),
            "inverse": named(&self.b_roster, &self.inverse.components, "log "),
            "conventions": {
                "forward": "log q_a = log y_a + series; tau_b = series (in y, u)",
                "inverse": "log y_a = log q_a + series; u_b = series (in q, tau)"
            },
        })
    }
}

/// Splits the `1/z` coefficient of `I` into the mirror map and inverts it.
pub fn mirror_map_from(ext: &ExtendedFanData, i: &ISeries) -> Result<MirrorMap, MirrorError> {
    let order = i.order.clone();
    let b = b_roster(ext);
    let a = a_roster(ext);
    let r = ext.r();
    let mut comps: Vec<PuiseuxSeries> = (0..ext.r_ext()).map(|_| PuiseuxSeries::zero(&b, Some(order.clone()))).collect();
    for entry in &i.entries {
        let el = &entry.element;
        let is_zero_class = el.coords.iter().all(Zero::is_zero);
        let exps: Vec<Rational> = el.lambda.iter().chain(el.mu.iter()).cloned().collect();
        for (&zexp, poly) in &entry.coefficients {
            if zexp >= 0 {
                if is_zero_class {
                    continue;
                }
                return Err(MirrorError::MirrorShapeViolation(format!(
                    "class {:?} contributes at z^{zexp}",
                    show(&el.coords)
                )));
            }
            if zexp != -1 {
                continue;
            }
            let deg = poly.degree().unwrap_or(0);
            match &el.nu {
                None => {
                    if deg != 1 || poly.terms().keys().any(|e| e.iter().sum::<u32>() != 1) {
                        return Err(MirrorError::MirrorShapeViolation(format!(
                            "untwisted class {:?} has a 1/z term of degree {deg}",
                            show(&el.coords)
                        )));
                    }
                    for (e, c) in poly.terms() {
                        let slot = e.iter().position(|k| *k == 1).expect("linear monomial");
                        let term = PuiseuxSeries::monomial(&b, &exps, c.clone(), None)?;
                        comps[slot] = comps[slot].add(&term)?;
                    }
                }
                Some(nu) => {
                    let idx = ext.extra.iter().position(|x| x.vector == nu.vector);
                    match idx {
                        Some(k) if deg == 0 => {
                            let c = poly.coefficient(&vec![0; r]);
                            let term = PuiseuxSeries::monomial(&b, &exps, c, None)?;
                            comps[r + k] = comps[r + k].add(&term)?;
                        }
                        _ => {
                            return Err(MirrorError::MirrorShapeViolation(format!(
                                "sector {} of age {} carries a 1/z term of p-degree {deg}",
                                nu.vector,
                                crate::exact_math::fmt_rational(&nu.age)
                            )))
                        }
                    }
                }
            }
        }
    }
    let forward = MirrorShapedMap { source: b.clone(), target: a.clone(), components: comps };
    let inverse = multivar_invert(&forward).map_err(|e| match e {
        crate::series_engine::SeriesError::NotMirrorShaped(m) => MirrorError::MirrorShapeViolation(m),
        other => MirrorError::Series(other),
    })?;
    let map = MirrorMap { order, b_roster: b, a_roster: a, forward, inverse, lifts: ext.lifts.clone() };
    if !map.round_trip_exact()? {
        return Err(MirrorError::MirrorShapeViolation("inverse fails the round trip".into()));
    }
    Ok(map)
}

fn show(v: &[Rational]) -> Vec<String> {
    v.iter().map(crate::exact_math::fmt_rational).collect()
}

/// Mirror map through weighted degree `order`.
pub fn mirror_map(ext: &ExtendedFanData, order: &Rational) -> Result<MirrorMap, MirrorError> {
    let i = i_function(ext, order, 1);
    mirror_map_from(ext, &i)
}
