//! Hori–Vafa and Lagrangian Floer superpotentials and the open invariants they encode.

use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::{a_roster, b_roster, mirror_map, MirrorError, MirrorMap};
use crate::exact_math::{factorial, lcm_denominators, rational_inverse, LatticeVector, Rational};
use crate::extended_fan::ExtendedFanData;
use crate::series_engine::{PuiseuxSeries, Roster, SeriesJson, Substitution, Var};
use crate::stacky_fan::StackyFan;

/// Coordinates in which Hori–Vafa coefficients are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// `y_1..y_{r'}` dual to `d_1..d_{r'}`.
    Original,
    /// `y_1..y_r` and `u_b = y_b y^{−λ_b}`.
    Adapted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTerm {
    /// Index `j` of `b_j` among the extended vectors.
    pub index: usize,
    pub vector: LatticeVector,
    pub coefficient: PuiseuxSeries,
    /// Exponents of the leading (Hori–Vafa) monomial of this term.
    pub basic: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    /// Rays whose coefficient is fixed to 1.
    pub gauge: Vec<usize>,
    pub terms: Vec<PotentialTerm>,
    /// `"theorem"` or `"conjectural via open mirror theorem"` for Lagrangian Floer output.
    pub status: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermJson {
    pub vector: Vec<i64>,
    pub coefficient: SeriesJson,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialJson {
    pub gauge: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    pub terms: Vec<TermJson>,
}

impl Potential {
    pub fn term(&self, index: usize) -> Option<&PotentialTerm> {
        self.terms.iter().find(|t| t.index == index)
    }

    pub fn to_json(&self) -> PotentialJson {
        PotentialJson {
            gauge: self.gauge.clone(),
            status: self.status.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    vector: t.vector.to_i64().expect("small lattice vector"),
                    coefficient: t.coefficient.to_json(),
                })
                .collect(),
        }
    }
}

/// Lexicographically first maximal cone.
pub fn default_gauge(fan: &StackyFan) -> Vec<usize> {
    fan.max_cones().iter().min().cloned().expect("fan has cones")
}

/// Whether the open mirror theorem is proved for this fan: toric manifolds and `P(1,…,1,n)`.
pub fn theorem_status(ext: &ExtendedFanData) -> &'static str {
    let fan = &ext.base;
    let smooth = ext.extra.is_empty()
        && fan.max_cones().iter().all(|c| {
            let gens = fan.cone_generators(c);
            crate::exact_math::cone_index(&gens).is_ok_and(|i| i.is_one())
        });
    let weighted = ext.r() == 1 && fan.num_rays() == fan.dim() + 1 && {
        let mut w: Vec<i64> = ext.basis[0].coords()[..fan.num_rays()].iter().filter_map(|c| c.to_i64()).collect();
        w.sort_unstable();
        w.len() == fan.num_rays() && w[..w.len() - 1].iter().all(|x| *x == 1)
    };
    if smooth || weighted {
        "theorem"
    } else {
        "conjectural via open mirror theorem"
    }
}

/// `C_j` as exponent vectors in the original chart: `C_j = 1` on `gauge`, the rest solved from
/// `Π_j C_j^{d_{aj}} = y_a`.
fn gauge_exponents(ext: &ExtendedFanData, gauge: &[usize]) -> Result<Vec<Vec<Rational>>, MirrorError> {
    let mut sorted = gauge.to_vec();
    sorted.sort_unstable();
    if !ext.base.max_cones().contains(&sorted) {
        return Err(MirrorError::GaugeUnsolvable(format!("{gauge:?} is not a maximal cone")));
    }
    let outside: Vec<usize> = (0..ext.m_ext()).filter(|j| !sorted.contains(j)).collect();
    let rows: Vec<Vec<Rational>> = (0..ext.r_ext())
        .map(|a| outside.iter().map(|&j| Rational::from_integer(ext.d(a, j).clone())).collect())
        .collect();
    let inv = rational_inverse(&rows).ok_or_else(|| MirrorError::GaugeUnsolvable("singular constraints".into()))?;
    let mut exps = vec![vec![Rational::zero(); ext.r_ext()]; ext.m_ext()];
    for (idx, &j) in outside.iter().enumerate() {
        exps[j] = inv[idx].clone();
    }
    Ok(exps)
}

fn original_roster(ext: &ExtendedFanData, exps: &[Vec<Rational>]) -> Arc<Roster> {
    let vars = (0..ext.r_ext())
        .map(|a| {
            let den = lcm_denominators(exps.iter().map(|e| &e[a])).to_u32().expect("small denominator");
            let weight = if a < ext.r() {
                Rational::one()
            } else {
                ext.lifts[a - ext.r()].iter().fold(Rational::one(), |acc, l| acc + l)
            };
            Var { name: format!("y{}", a + 1), formal: false, denom: den, weight }
        })
        .collect();
    Roster::new(vars)
}

/// Hori–Vafa superpotential `Σ_j C_j z^{b_j}` in the requested chart.
pub fn hori_vafa(ext: &ExtendedFanData, chart: Chart, gauge: &[usize]) -> Result<Potential, MirrorError> {
    let exps = gauge_exponents(ext, gauge)?;
    let r = ext.r();
    let roster = match chart {
        Chart::Original => original_roster(ext, &exps),
        Chart::Adapted => b_roster(ext),
    };
    let mut terms = Vec::new();
    for (j, e) in exps.iter().enumerate() {
        let local = match chart {
            Chart::Original => e.clone(),
            Chart::Adapted => {
                let mut v: Vec<Rational> = (0..r)
                    .map(|a| {
                        (r..ext.r_ext()).fold(e[a].clone(), |acc, b| acc + &e[b] * &ext.lifts[b - r][a])
                    })
                    .collect();
                for x in &e[r..] {
                    if !x.is_integer() || x.is_negative() {
                        return Err(MirrorError::GaugeUnsolvable(format!(
                            "C_{} needs a non-polynomial power of an extended coordinate",
                            j + 1
                        )));
                    }
                    v.push(x.clone());
                }
                v
            }
        };
        let coefficient = PuiseuxSeries::monomial(&roster, &local, Rational::one(), None)
            .map_err(|err| MirrorError::GaugeUnsolvable(err.to_string()))?;
        terms.push(PotentialTerm { index: j, vector: ext.vector(j).clone(), coefficient, basic: local });
    }
    let mut g = gauge.to_vec();
    g.sort_unstable();
    Ok(Potential { gauge: g, terms, status: None })
}

/// `W^LF(q,τ) = W^HV(y(q,τ))` from an existing mirror map.
pub fn lf_from_map(ext: &ExtendedFanData, mm: &MirrorMap, gauge: &[usize]) -> Result<Potential, MirrorError> {
    let hv = hori_vafa(ext, Chart::Adapted, gauge)?;
    let a = a_roster(ext);
    let subs: Vec<Substitution> = (0..ext.r_ext())
        .map(|i| {
            if i < ext.r() {
                let mut monomial = vec![Rational::zero(); a.len()];
                monomial[i] = Rational::one();
                Substitution::Exponential { monomial, log_factor: mm.inverse.components[i].clone() }
            } else {
                Substitution::Series(mm.inverse.components[i].clone())
            }
        })
        .collect();
    let mut terms = Vec::new();
    for t in hv.terms {
        let coefficient = t.coefficient.substitute(&subs, &a)?;
        terms.push(PotentialTerm { coefficient, ..t });
    }
    Ok(Potential { gauge: hv.gauge, terms, status: Some(theorem_status(ext).to_string()) })
}

/// Lagrangian Floer superpotential through weighted degree `order`.
pub fn lf_superpotential(ext: &ExtendedFanData, order: &Rational, gauge: &[usize]) -> Result<Potential, MirrorError> {
    let mm = mirror_map(ext, order)?;
    lf_from_map(ext, &mm, gauge)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OpenGWEntry {
    /// Term index `j` of the basic class `β_j`.
    pub term: usize,
    /// Curve class `d` added to `β_j`, in `q`-exponents.
    #[serde(serialize_with = "crate::json::ser_rationals")]
    pub class: Vec<Rational>,
    /// Multidegree `l` in the `τ` variables.
    pub l: Vec<u64>,
    #[serde(serialize_with = "crate::json::ser_rational")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OpenGWTable {
    pub entries: Vec<OpenGWEntry>,
    /// Weighted degree through which each term's generating function is known.
    #[serde(serialize_with = "crate::json::ser_rationals")]
    pub known_through: Vec<Rational>,
}

impl OpenGWTable {
    /// `n_{1,l,β_j+d}`; zero for absent entries.
    pub fn value(&self, term: usize, class: &[Rational], l: &[u64]) -> Rational {
        self.entries
            .iter()
            .find(|e| e.term == term && e.class == class && e.l == l)
            .map_or_else(Rational::zero, |e| e.value.clone())
    }

    pub fn for_term(&self, term: usize) -> impl Iterator<Item = &OpenGWEntry> {
        self.entries.iter().filter(move |e| e.term == term)
    }
}

/// Reads `n_{1,l,β_j+d} = l!·[q^d τ^l](C_j / q^{λ_j})` off a potential in `(q, τ)`.
pub fn extract_open_gw(w: &Potential) -> Result<OpenGWTable, MirrorError> {
    let mut entries = Vec::new();
    let mut known = Vec::new();
    for t in &w.terms {
        let roster = t.coefficient.roster().clone();
        let vars = roster.vars();
        let shift: Vec<Rational> =
            t.basic.iter().zip(vars).map(|(e, v)| if v.formal { Rational::zero() } else { -e.clone() }).collect();
        let gf = t.coefficient.mul_monomial(&shift, &Rational::one())?;
        known.push(gf.order().unwrap_or_else(|| Rational::from_integer((-1).into())));
        let basic_l: Vec<u64> =
            t.basic.iter().zip(vars).filter(|(_, v)| v.formal).map(|(e, _)| e.to_integer().to_u64().unwrap_or(0)).collect();
        let mut basic_seen = false;
        for (exps, c) in gf.terms() {
            let class: Vec<Rational> =
                exps.iter().zip(vars).filter(|(_, v)| !v.formal).map(|(e, _)| e.clone()).collect();
            let l: Vec<u64> =
                exps.iter().zip(vars).filter(|(_, v)| v.formal).map(|(e, _)| e.to_integer().to_u64().expect("formal")).collect();
            let lfact = l.iter().fold(Rational::one(), |acc, k| acc * Rational::from_integer(factorial(*k)));
            let value = c * lfact;
            if class.iter().all(Zero::is_zero) && l == basic_l {
                if !value.is_one() {
                    return Err(MirrorError::BasicNotOne(t.index));
                }
                basic_seen = true;
            }
            entries.push(OpenGWEntry { term: t.index, class, l, value });
        }
        if !basic_seen {
            return Err(MirrorError::BasicNotOne(t.index));
        }
    }
    Ok(OpenGWTable { entries, known_through: known })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_math::{int, rat};
    use crate::extended_fan::build_extended;
    use crate::stacky_fan::fixtures::*;

    #[test]
    fn hori_vafa_of_p112() {
        let ext = build_extended(&p112()).unwrap();
        let w = hori_vafa(&ext, Chart::Original, &[0, 2]).unwrap();
        let exps: Vec<Vec<Rational>> = w.terms.iter().map(|t| t.basic.clone()).collect();
        assert_eq!(exps, vec![vec![int(0), int(0)], vec![int(1), int(0)], vec![int(0), int(0)], vec![int(0), int(1)]]);
    }

    #[test]
    fn hori_vafa_of_hirzebruch() {
        let ext = build_extended(&f2()).unwrap();
        let w = hori_vafa(&ext, Chart::Adapted, &[0, 2]).unwrap();
        let exps: Vec<Vec<Rational>> = w.terms.iter().map(|t| t.basic.clone()).collect();
        assert_eq!(exps, vec![vec![int(0), int(0)], vec![int(1), int(2)], vec![int(0), int(0)], vec![int(0), int(1)]]);
    }

    #[test]
    fn hori_vafa_of_line() {
        let ext = build_extended(&p1()).unwrap();
        let w = hori_vafa(&ext, Chart::Original, &default_gauge(&ext.base)).unwrap();
        assert_eq!(w.terms[0].basic, vec![int(0)]);
        assert_eq!(w.terms[1].basic, vec![int(1)]);
    }

    #[test]
    fn bad_gauge() {
        let ext = build_extended(&p2()).unwrap();
        assert!(matches!(hori_vafa(&ext, Chart::Adapted, &[0]), Err(MirrorError::GaugeUnsolvable(_))));
    }

    #[test]
    fn p112_open_invariants() {
        let ext = build_extended(&p112()).unwrap();
        let w = lf_superpotential(&ext, &int(9), &[0, 2]).unwrap();
        assert_eq!(w.status.as_deref(), Some("theorem"));
        let table = extract_open_gw(&w).unwrap();
        for l in 0..=9u64 {
            let expected = if l % 2 == 0 {
                Rational::zero()
            } else {
                let j = (l - 1) / 2;
                let sign = if j % 2 == 0 { int(1) } else { int(-1) };
                sign / int(4).pow(j as i32)
            };
            assert_eq!(table.value(3, &[int(0)], &[l]), expected, "l = {l}");
        }
        let nu = w.term(3).unwrap();
        assert_eq!(nu.coefficient.coefficient(&[rat(1, 2), int(3)]), rat(-1, 24));
    }

    #[test]
    fn hirzebruch_open_invariants() {
        let ext = build_extended(&f2()).unwrap();
        let w = lf_superpotential(&ext, &int(7), &[0, 2]).unwrap();
        let b4 = &w.term(3).unwrap().coefficient;
        assert_eq!(b4.coefficient(&[int(0), int(1)]), int(1));
        assert_eq!(b4.coefficient(&[int(1), int(1)]), int(1));
        assert_eq!(b4.len(), 2);
        let b2 = &w.term(1).unwrap().coefficient;
        assert_eq!(b2.terms(), vec![(vec![int(1), int(2)], int(1))]);
        let table = extract_open_gw(&w).unwrap();
        assert_eq!(table.value(3, &[int(1), int(0)], &[]), int(1));
        assert_eq!(table.value(3, &[int(2), int(0)], &[]), int(0));
    }
}
