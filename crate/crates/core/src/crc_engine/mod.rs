//! Crepant resolutions, B-model chart gluing, analytic continuation for P(1,…,1,n), the change
//! of variables `Q(q)`, open CRC verification and the specialization check.

mod continuation;
mod gamma;
mod verify;

use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::exact_math::{fmt_rational, rational_inverse, solve_columns, LatticeVector, Rational};
use crate::extended_fan::{build_extended, ExtendedError, ExtendedFanData};
use crate::mirror_engine::MirrorError;
use crate::series_engine::SeriesError;
use crate::stacky_fan::{compute_box, validate_fan, FanError, StackyFan};

pub use continuation::{change_of_variables, continuation_wpn, ChangeOfVariables, ComplexSeries, ContinuationFormula, Parity};
pub use gamma::gamma;
pub use verify::{crc_verify, specialization_check, CrcReport, IdentityReport, SpecializationReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CrcError {
    #[error("continuation needs n ≥ 2, got {0}")]
    UnsupportedN(u32),
    #[error("curve-class bases do not match: {0}")]
    BasisMismatch(String),
    #[error("pair is not a crepant resolution: {0}")]
    NotCrepant(String),
    #[error("pair is not the P(1,…,1,n) family: {0}")]
    NotWeightedFamily(String),
    #[error("no maximal cone is shared by both fans")]
    NoCommonGauge,
    #[error("{identity}: error {error:e} exceeds tolerance")]
    MismatchBeyondTolerance { identity: String, error: f64 },
    #[error("exceptional term {term} does not vanish: {magnitude:e}")]
    NonvanishingExceptionalTerm { term: usize, magnitude: f64 },
    #[error(transparent)]
    Mirror(#[from] MirrorError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Extended(#[from] ExtendedError),
    #[error(transparent)]
    Fan(#[from] FanError),
}

/// Orbifold fan `X` with a candidate resolution `Y` and the ray correspondence between them.
#[derive(Debug, Clone)]
pub struct ResolutionPair {
    pub x: StackyFan,
    pub y: StackyFan,
    /// Y-index of every X-ray, when present.
    pub ray_map: Vec<Option<usize>>,
    /// Y-rays that are not X-rays.
    pub new_rays: Vec<usize>,
}

impl ResolutionPair {
    pub fn new(x: StackyFan, y: StackyFan) -> Self {
        let ray_map: Vec<Option<usize>> = x.rays().iter().map(|v| y.rays().iter().position(|w| w == v)).collect();
        let new_rays = (0..y.num_rays()).filter(|j| !ray_map.contains(&Some(*j))).collect();
        ResolutionPair { x, y, ray_map, new_rays }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewRay {
    pub index: usize,
    pub vector: LatticeVector,
    pub in_box: bool,
    #[serde(serialize_with = "ser_opt_rational")]
    pub age: Option<Rational>,
}

fn ser_opt_rational<S: serde::Serializer>(x: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&fmt_rational(v)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrepantReport {
    pub valid: bool,
    pub errors: Vec<String>,
    pub refines: bool,
    /// X-rays with no matching Y-ray.
    pub missing_rays: Vec<usize>,
    pub new_rays: Vec<NewRay>,
    /// Y-cones contained in no X-cone.
    pub offending_cones: Vec<Vec<usize>>,
    pub crepant: bool,
}

/// Checks that `Y` refines `X` and that every new ray is an age-1 Box element of `X`.
pub fn verify_crepant(pair: &ResolutionPair) -> CrepantReport {
    let mut errors = Vec::new();
    for (name, fan) in [("X", &pair.x), ("Y", &pair.y)] {
        errors.extend(validate_fan(fan).errors.into_iter().map(|e| format!("{name}: {e}")));
    }
    let valid = errors.is_empty() && pair.x.dim() == pair.y.dim();
    if pair.x.dim() != pair.y.dim() {
        errors.push(format!("dimensions differ: {} and {}", pair.x.dim(), pair.y.dim()));
    }
    let missing_rays: Vec<usize> = (0..pair.x.num_rays()).filter(|&i| pair.ray_map[i].is_none()).collect();
    let mut offending_cones = Vec::new();
    if valid {
        for cone in pair.y.max_cones() {
            let inside = pair.x.max_cones().iter().any(|xc| {
                let gens = pair.x.cone_generators(xc);
                cone.iter().all(|&j| {
                    crate::exact_math::cone_coefficients(&gens, &pair.y.ray(j).to_rational()).is_ok_and(|c| c.is_some())
                })
            });
            if !inside {
                offending_cones.push(cone.clone());
            }
        }
    }
    let boxes = if valid { compute_box(&pair.x).unwrap_or_default() } else { Vec::new() };
    let new_rays: Vec<NewRay> = pair
        .new_rays
        .iter()
        .map(|&j| {
            let v = pair.y.ray(j);
            let hit = boxes.iter().find(|b| &b.vector == v);
            NewRay { index: j, vector: v.clone(), in_box: hit.is_some(), age: hit.map(|b| b.age.clone()) }
        })
        .collect();
    let refines = valid && offending_cones.is_empty() && missing_rays.is_empty();
    let crepant = refines && new_rays.iter().all(|r| r.age.as_ref().is_some_and(One::is_one));
    CrepantReport { valid, errors, refines, missing_rays, new_rays, offending_cones, crepant }
}

/// Monomial relations between the B-model charts `y` of X (dual to `d_a`) and `U` of Y (dual
/// to `α_b`), with the intermediate `η` chart when X has one base class and one extra vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartGluing {
    /// Y extended index of every X extended index.
    pub index_map: Vec<usize>,
    /// `d_a = Σ_b M_{ab} α_b`, so `y_a = Π_b U_b^{M_{ab}}`.
    pub y_in_u: Vec<Vec<Rational>>,
    /// `U_b = Π_a y_a^{N_{ba}}` with `N = M⁻¹`.
    pub u_in_y: Vec<Vec<Rational>>,
    /// `η_1 = y_1^{−λ} y_2`, `η_2 = y_1^{λ}` as exponent rows in `y` and in `U`.
    pub eta_in_y: Option<Vec<Vec<Rational>>>,
    pub eta_in_u: Option<Vec<Vec<Rational>>>,
    pub branch: String,
}

pub(crate) const BRANCH: &str = "principal branch of log and of fractional powers; constant -i*pi in log Q1 for even n";

impl ChartGluing {
    /// Exponent rows composed: `(rows in y) · M` gives rows in `U`.
    pub fn to_u(&self, rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
        compose_rows(rows, &self.y_in_u)
    }

    /// True when `y(U(y)) = y` as monomial maps.
    pub fn round_trip(&self) -> bool {
        let back = compose_rows(&self.y_in_u, &self.u_in_y);
        back.iter().enumerate().all(|(i, row)| row.iter().enumerate().all(|(j, x)| *x == Rational::from_integer((i == j).into())))
    }

    pub fn to_json(&self) -> Value {
        let mono = |rows: &[Vec<Rational>], out: &str, vars: &str| -> Vec<String> {
            rows.iter()
                .enumerate()
                .map(|(i, row)| {
                    let parts: Vec<String> = row
                        .iter()
                        .enumerate()
                        .filter(|(_, e)| !e.is_zero())
                        .map(|(j, e)| if e.is_one() { format!("{vars}{}", j + 1) } else { format!("{vars}{}^({})", j + 1, fmt_rational(e)) })
                        .collect();
                    let rhs = if parts.is_empty() { "1".to_string() } else { parts.join("*") };
                    format!("{out}{} = {rhs}", i + 1)
                })
                .collect()
        };
        let mut v = json!({
            "index_map": self.index_map,
            "y_in_U": mono(&self.y_in_u, "y", "U"),
            "U_in_y": mono(&self.u_in_y, "U", "y"),
            "branch": self.branch,
        });
        if let (Some(ey), Some(eu)) = (&self.eta_in_y, &self.eta_in_u) {
            v["eta_in_y"] = json!(mono(ey, "eta", "y"));
            v["eta_in_U"] = json!(mono(eu, "eta", "U"));
        }
        v
    }
}

fn compose_rows(rows: &[Vec<Rational>], m: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let cols = m.first().map_or(0, Vec::len);
    rows.iter()
        .map(|row| (0..cols).map(|b| row.iter().zip(m).fold(Rational::zero(), |acc, (e, mr)| acc + e * &mr[b])).collect())
        .collect()
}

/// Builds the monomial gluing from the two curve-class bases written in one relation lattice.
pub fn glue_charts(pair: &ResolutionPair) -> Result<ChartGluing, CrcError> {
    let report = verify_crepant(pair);
    if !report.crepant {
        return Err(CrcError::NotCrepant(format!(
            "refines = {}, new rays {:?}",
            report.refines,
            report.new_rays.iter().map(|r| r.index).collect::<Vec<_>>()
        )));
    }
    let ex = build_extended(&pair.x)?;
    let ey = build_extended(&pair.y)?;
    glue_extended(&ex, &ey)
}

pub(crate) fn glue_extended(ex: &ExtendedFanData, ey: &ExtendedFanData) -> Result<ChartGluing, CrcError> {
    if ex.m_ext() != ey.m_ext() || ex.r_ext() != ey.r_ext() {
        return Err(CrcError::BasisMismatch(format!(
            "X has {} extended vectors and rank {}, Y has {} and {}",
            ex.m_ext(),
            ex.r_ext(),
            ey.m_ext(),
            ey.r_ext()
        )));
    }
    let mut index_map = Vec::with_capacity(ex.m_ext());
    for j in 0..ex.m_ext() {
        let k = (0..ey.m_ext())
            .find(|&k| ey.vector(k) == ex.vector(j))
            .ok_or_else(|| CrcError::BasisMismatch(format!("{} has no counterpart in Y", ex.vector(j))))?;
        index_map.push(k);
    }
    let alphas: Vec<Vec<Rational>> = (0..ey.r_ext())
        .map(|b| index_map.iter().map(|&k| Rational::from_integer(ey.d(b, k).clone())).collect())
        .collect();
    let mut y_in_u = Vec::with_capacity(ex.r_ext());
    for a in 0..ex.r_ext() {
        let d: Vec<Rational> = (0..ex.m_ext()).map(|j| Rational::from_integer(ex.d(a, j).clone())).collect();
        let row = solve_columns(&alphas, &d)
            .ok_or_else(|| CrcError::BasisMismatch(format!("d_{} is not in the span of the Y basis", a + 1)))?;
        y_in_u.push(row);
    }
    let u_in_y = rational_inverse(&y_in_u).ok_or_else(|| CrcError::BasisMismatch("singular push-forward".into()))?;
    let (eta_in_y, eta_in_u) = if ex.r() == 1 && ex.extra.len() == 1 {
        let lam = ex.lifts[0][0].clone();
        let rows = vec![vec![-lam.clone(), Rational::one()], vec![lam, Rational::zero()]];
        let in_u = compose_rows(&rows, &y_in_u);
        (Some(rows), Some(in_u))
    } else {
        (None, None)
    };
    Ok(ChartGluing { index_map, y_in_u, u_in_y, eta_in_y, eta_in_u, branch: BRANCH.to_string() })
}

/// `P(1,…,1,n)` in dimension `n`: rays `e_1..e_{n−1}`, `(−1,…,−1,n)`, `−e_n`.
pub fn weighted_projective(n: usize) -> StackyFan {
    let mut rays: Vec<LatticeVector> = (0..n - 1).map(|i| LatticeVector::unit(n, i)).collect();
    let mut last = vec![-1i64; n];
    last[n - 1] = n as i64;
    rays.push(LatticeVector::from_i64(&last));
    rays.push(LatticeVector::unit(n, n - 1).neg());
    let cones = (0..=n).map(|skip| (0..=n).filter(|&i| i != skip).collect()).collect();
    StackyFan::new(n, rays, cones)
}

/// Star subdivision of `P(1,…,1,n)` at `e_n`, the total space of `P(K ⊕ O)` over `P^{n−1}`.
pub fn weighted_projective_resolution(n: usize) -> StackyFan {
    let x = weighted_projective(n);
    let mut rays = x.rays().to_vec();
    rays.push(LatticeVector::unit(n, n - 1));
    let nu = n + 1;
    let mut cones: Vec<Vec<usize>> = Vec::new();
    for cone in x.max_cones() {
        if cone.contains(&n) {
            cones.push(cone.clone());
        } else {
            for drop in cone {
                let mut c: Vec<usize> = cone.iter().copied().filter(|i| i != drop).collect();
                c.push(nu);
                cones.push(c);
            }
        }
    }
    StackyFan::new(n, rays, cones)
}

pub fn weighted_projective_pair(n: usize) -> ResolutionPair {
    ResolutionPair::new(weighted_projective(n), weighted_projective_resolution(n))
}

/// `n` when `X` is `P(1,…,1,n)` up to ray order: one base class with weights `(1,…,1,n)` and
/// a single extended vector.
pub fn detect_weighted_family(ex: &ExtendedFanData) -> Option<u32> {
    if ex.r() != 1 || ex.extra.len() != 1 || ex.base.num_rays() != ex.base.dim() + 1 {
        return None;
    }
    let mut w: Vec<Rational> = (0..ex.m()).map(|j| Rational::from_integer(ex.d(0, j).clone())).collect();
    w.sort();
    let n = w.last()?.to_integer();
    let ok = w[..w.len() - 1].iter().all(One::is_one) && Rational::from_integer(n.clone()) == Rational::from_integer(ex.base.dim().into());
    ok.then(|| u32::try_from(n).ok()).flatten()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_math::{int, rat};

    #[test]
    fn f2_resolves_p112() {
        let pair = weighted_projective_pair(2);
        assert_eq!(pair.y.rays(), crate::stacky_fan::fixtures::f2().rays());
        let r = verify_crepant(&pair);
        assert!(r.crepant, "{r:?}");
        assert_eq!(r.new_rays.len(), 1);
        assert_eq!(r.new_rays[0].vector, LatticeVector::from_i64(&[0, 1]));
        assert_eq!(r.new_rays[0].age, Some(int(1)));
    }

    #[test]
    fn blowup_of_plane_is_not_crepant() {
        let p2 = crate::stacky_fan::fixtures::p2();
        let blowup = StackyFan::from_i64(
            2,
            &[&[1, 0], &[0, 1], &[-1, -1], &[1, 1]],
            &[&[0, 3], &[3, 1], &[1, 2], &[2, 0]],
        );
        let r = verify_crepant(&ResolutionPair::new(p2, blowup));
        assert!(r.refines);
        assert!(!r.new_rays[0].in_box);
        assert!(!r.crepant);
    }

    #[test]
    fn identity_pair_is_crepant() {
        let x = crate::stacky_fan::fixtures::p112();
        let r = verify_crepant(&ResolutionPair::new(x.clone(), x));
        assert!(r.crepant);
        assert!(r.new_rays.is_empty());
    }

    #[test]
    fn coarsening_is_flagged() {
        let r = verify_crepant(&ResolutionPair::new(
            crate::stacky_fan::fixtures::f2(),
            crate::stacky_fan::fixtures::p112(),
        ));
        assert!(!r.refines);
        assert_eq!(r.missing_rays, vec![3]);
    }

    #[test]
    fn weighted_family_gluing() {
        for n in 2..=4usize {
            let g = glue_charts(&weighted_projective_pair(n)).unwrap();
            let nn = int(n as i64);
            assert_eq!(g.y_in_u, vec![vec![int(1), nn.clone()], vec![int(0), int(1)]], "n = {n}");
            assert_eq!(g.u_in_y, vec![vec![int(1), -nn], vec![int(0), int(1)]]);
            let lam = rat(1, n as i64);
            assert_eq!(g.eta_in_u.clone().unwrap(), vec![vec![-lam.clone(), int(0)], vec![lam, int(1)]]);
            assert!(g.round_trip());
        }
    }

    #[test]
    fn smooth_identity_gluing() {
        let f2 = crate::stacky_fan::fixtures::f2();
        let g = glue_charts(&ResolutionPair::new(f2.clone(), f2)).unwrap();
        assert_eq!(g.y_in_u, vec![vec![int(1), int(0)], vec![int(0), int(1)]]);
        assert!(g.eta_in_u.is_none());
    }

    #[test]
    fn family_detection() {
        for n in 2..=4usize {
            let ex = build_extended(&weighted_projective(n)).unwrap();
            assert_eq!(detect_weighted_family(&ex), Some(n as u32));
        }
        let ex = build_extended(&crate::stacky_fan::fixtures::f2()).unwrap();
        assert_eq!(detect_weighted_family(&ex), None);
    }
}
