//! Stacky fans, Box elements, walls, labeled polytopes, disc classes and the X̄ construction.

mod boxes;
mod discs;
mod polytope;
mod walls;
mod xbar;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exact_math::{
    cone_coefficients, rational_rank, ExactMathError, LatticeVector, Rational,
};

pub use boxes::{box_elements_in_cone, box_of_cone, compute_box, is_gorenstein, BoxElement};
pub use discs::{
    blaschke_boundary_check, disc_area, maslov_index_cw, AreaTarget, BlaschkeComponent,
    BlaschkeDisc, BoxTerm, DiscClass, MaslovIndex,
};
pub use polytope::{fan_to_polytope, polytope_to_fan, LabeledPolytope};
pub use walls::{primitive_collections, wall_curve_classes, WallCurve};
pub(crate) use walls::combinations;
pub use xbar::{star_subdivide_xbar, XBar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FanError {
    #[error("invalid fan: {0}")]
    InvalidFan(String),
    #[error("fan is not complete: {0}")]
    IncompleteFan(String),
    #[error("polytope is unbounded")]
    UnboundedPolytope,
    #[error("vertex {0} lies on more than dim facets")]
    NonSimpleVertex(String),
    #[error("facet {0} does not meet the polytope")]
    RedundantFacet(usize),
    #[error("the polytope's normal fan differs from the given fan")]
    NotNormalFan,
    #[error("point is not interior: facet {0} has nonpositive value")]
    PointNotInterior(usize),
    #[error("disc class is not basic")]
    NonBasicClass,
    #[error("invalid disc data: {0}")]
    InvalidDiscData(String),
    #[error("fan schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Math(#[from] ExactMathError),
}

/// Complete simplicial fan with a stacky vector on every ray.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackyFan {
    dim: usize,
    rays: Vec<LatticeVector>,
    max_cones: Vec<Vec<usize>>,
}

impl StackyFan {
    /// Unchecked constructor; cone index lists are sorted. Use [`validate_fan`] to check.
    pub fn new(dim: usize, rays: Vec<LatticeVector>, max_cones: Vec<Vec<usize>>) -> Self {
        let max_cones = max_cones
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        StackyFan { dim, rays, max_cones }
    }

    pub fn from_i64(dim: usize, rays: &[&[i64]], max_cones: &[&[usize]]) -> Self {
        Self::new(
            dim,
            rays.iter().map(|r| LatticeVector::from_i64(r)).collect(),
            max_cones.iter().map(|c| c.to_vec()).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn ray(&self, i: usize) -> &LatticeVector {
        &self.rays[i]
    }

    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    /// Primitive generator `v_j` and label `c_j` with `b_j = c_j v_j`.
    pub fn primitive(&self, j: usize) -> (LatticeVector, BigInt) {
        self.rays[j].primitive_part()
    }

    pub fn cone_generators(&self, cone: &[usize]) -> Vec<LatticeVector> {
        cone.iter().map(|&i| self.rays[i].clone()).collect()
    }

    /// True when the ray set is a subset of some maximal cone.
    pub fn spans_cone(&self, rays: &[usize]) -> bool {
        self.max_cones.iter().any(|c| rays.iter().all(|r| c.contains(r)))
    }

    /// Index of a maximal cone containing `v`, with its coefficients.
    pub fn locate(&self, v: &[Rational]) -> Result<Option<(usize, Vec<Rational>)>, ExactMathError> {
        for (k, cone) in self.max_cones.iter().enumerate() {
            if let Some(c) = cone_coefficients(&self.cone_generators(cone), v)? {
                return Ok(Some((k, c)));
            }
        }
        Ok(None)
    }

    pub fn from_json_str(s: &str) -> Result<Self, FanError> {
        let raw: FanJson = serde_json::from_str(s).map_err(|e| FanError::Schema(e.to_string()))?;
        raw.into_fan()
    }

    pub fn to_json(&self) -> FanJson {
        FanJson {
            dim: self.dim,
            stacky_vectors: self.rays.iter().map(|r| r.to_i64().unwrap_or_default()).collect(),
            max_cones: self.max_cones.clone(),
            labels: None,
        }
    }

    /// Maximal (n−1)-faces with the two maximal cones on either side.
    pub(crate) fn wall_map(&self) -> BTreeMap<Vec<usize>, Vec<usize>> {
        let mut walls: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (k, cone) in self.max_cones.iter().enumerate() {
            for drop in 0..cone.len() {
                let face: Vec<usize> =
                    cone.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &r)| r).collect();
                walls.entry(face).or_default().push(k);
            }
        }
        walls
    }
}

/// Fan JSON schema: `{"dim", "stacky_vectors", "max_cones", "labels"?}` with 0-based cone indices.
/// When `labels` is present the vectors are primitive and are multiplied by the labels.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct FanJson {
    pub dim: usize,
    pub stacky_vectors: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<i64>>,
}

impl FanJson {
    pub fn into_fan(self) -> Result<StackyFan, FanError> {
        let schema = |m: String| Err(FanError::Schema(m));
        if self.dim == 0 {
            return schema("dim must be positive".into());
        }
        if let Some(v) = self.stacky_vectors.iter().find(|v| v.len() != self.dim) {
            return schema(format!("vector {v:?} has length {} but dim is {}", v.len(), self.dim));
        }
        let m = self.stacky_vectors.len();
        if let Some(c) = self.max_cones.iter().find(|c| c.iter().any(|&i| i >= m)) {
            return schema(format!("cone {c:?} references a ray index ≥ {m}"));
        }
        let mut rays: Vec<LatticeVector> =
            self.stacky_vectors.iter().map(|v| LatticeVector::from_i64(v)).collect();
        if let Some(labels) = &self.labels {
            if labels.len() != m {
                return schema(format!("{} labels for {m} vectors", labels.len()));
            }
            if labels.iter().any(|&c| c < 1) {
                return schema("labels must be positive".into());
            }
            for (r, &c) in rays.iter_mut().zip(labels) {
                if r.content() != BigInt::from(1) {
                    return schema(format!("labelled vector {r} is not primitive"));
                }
                *r = r.scale(&BigInt::from(c));
            }
        }
        Ok(StackyFan::new(self.dim, rays, self.max_cones))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FanReport {
    pub simplicial: bool,
    pub complete: bool,
    pub errors: Vec<String>,
}

impl FanReport {
    pub fn is_valid(&self) -> bool {
        self.simplicial && self.complete && self.errors.is_empty()
    }
}

const LOCATION_SAMPLES: usize = 64;

pub fn validate_fan(fan: &StackyFan) -> FanReport {
    let mut errors = Vec::new();
    let mut simplicial = true;
    let mut complete = true;
    let n = fan.dim;
    let m = fan.num_rays();

    if n == 0 {
        errors.push("dimension must be positive".to_string());
    }
    for (j, r) in fan.rays.iter().enumerate() {
        if r.dim() != n {
            errors.push(format!("ray {j} has dimension {} (expected {n})", r.dim()));
        } else if r.is_zero() {
            errors.push(format!("ray {j} is zero"));
        }
    }
    if !errors.is_empty() {
        return FanReport { simplicial: false, complete: false, errors };
    }
    let mut seen = BTreeMap::new();
    for j in 0..m {
        if let Some(k) = seen.insert(fan.primitive(j).0, j) {
            errors.push(format!("rays {k} and {j} are repeated"));
        }
    }
    let mut cone_set = BTreeSet::new();
    for (k, cone) in fan.max_cones.iter().enumerate() {
        if cone.iter().any(|&i| i >= m) {
            errors.push(format!("cone {k} references a missing ray"));
            simplicial = false;
            continue;
        }
        if cone.len() != n || cone.windows(2).any(|w| w[0] == w[1]) {
            errors.push(format!("cone {k} does not have {n} distinct generators"));
            simplicial = false;
            continue;
        }
        let gens: Vec<Vec<Rational>> = cone.iter().map(|&i| fan.rays[i].to_rational()).collect();
        if rational_rank(&gens) < n {
            errors.push(format!("cone {k} has dependent generators"));
            simplicial = false;
        }
        if !cone_set.insert(cone.clone()) {
            errors.push(format!("cone {k} is repeated"));
        }
    }
    if fan.max_cones.is_empty() {
        errors.push("no maximal cones".to_string());
        complete = false;
    }
    let used: BTreeSet<usize> = fan.max_cones.iter().flatten().copied().collect();
    if let Some(j) = (0..m).find(|j| !used.contains(j)) {
        errors.push(format!("ray {j} lies in no maximal cone"));
    }
    if !simplicial {
        return FanReport { simplicial, complete: false, errors };
    }

    let walls = fan.wall_map();
    for (face, cones) in &walls {
        if cones.len() != 2 {
            complete = false;
            errors.push(format!("wall {face:?} is shared by {} maximal cones", cones.len()));
        }
    }
    // Connectivity of the wall graph.
    let k = fan.max_cones.len();
    let mut adj = vec![Vec::new(); k];
    for cones in walls.values() {
        if let [a, b] = cones[..] {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut reached = vec![false; k];
    let mut queue = VecDeque::from([0]);
    if k > 0 {
        reached[0] = true;
    }
    while let Some(c) = queue.pop_front() {
        for &d in &adj[c] {
            if !reached[d] {
                reached[d] = true;
                queue.push_back(d);
            }
        }
    }
    if reached.iter().any(|r| !r) {
        complete = false;
        errors.push("wall graph is disconnected".to_string());
    }
    // Point location on pseudo-random integer directions.
    if complete {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_fa4);
        for _ in 0..LOCATION_SAMPLES {
            let v: Vec<Rational> =
                (0..n).map(|_| Rational::from_integer(rng.gen_range(-97i64..=97).into())).collect();
            if v.iter().all(Zero::is_zero) {
                continue;
            }
            let mut interior = 0;
            let mut found = false;
            for cone in &fan.max_cones {
                let Ok(Some(c)) = cone_coefficients(&fan.cone_generators(cone), &v) else {
                    continue;
                };
                found = true;
                if c.iter().all(Signed::is_positive) {
                    interior += 1;
                }
            }
            if !found {
                complete = false;
                errors.push("sampled direction lies in no cone".to_string());
                break;
            }
            if interior > 1 {
                errors.push("maximal cones overlap".to_string());
                break;
            }
        }
    }
    FanReport { simplicial, complete, errors }
}

pub(crate) fn require_valid(fan: &StackyFan) -> Result<(), FanError> {
    let report = validate_fan(fan);
    if report.is_valid() {
        Ok(())
    } else {
        Err(FanError::InvalidFan(report.errors.join("; ")))
    }
}

/// True when every maximal cone of `fine` lies in some maximal cone of `coarse`.
pub fn refines(fine: &StackyFan, coarse: &StackyFan) -> Result<bool, ExactMathError> {
    for cone in fine.max_cones() {
        let inside = coarse.max_cones().iter().try_fold(false, |acc, c| {
            if acc {
                return Ok(true);
            }
            let gens = coarse.cone_generators(c);
            for &r in cone {
                if cone_coefficients(&gens, &fine.ray(r).to_rational())?.is_none() {
                    return Ok(false);
                }
            }
            Ok::<bool, ExactMathError>(true)
        })?;
        if !inside {
            return Ok(false);
        }
    }
    Ok(true)
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn example_fans_are_valid() {
        for fan in [p2(), p112(), f2(), p1(), p1_35(), weighted(3), weighted(4)] {
            let r = validate_fan(&fan);
            assert!(r.is_valid(), "{r:?}");
        }
    }

    #[test]
    fn missing_cone_is_incomplete() {
        let fan = StackyFan::from_i64(2, &[&[1, 0], &[-1, 2], &[0, -1]], &[&[0, 1], &[1, 2]]);
        let r = validate_fan(&fan);
        assert!(r.simplicial);
        assert!(!r.complete);
    }

    #[test]
    fn dependent_generators_are_not_simplicial() {
        let fan = StackyFan::from_i64(2, &[&[1, 0], &[2, 0]], &[&[0, 1]]);
        let r = validate_fan(&fan);
        assert!(!r.simplicial);
        assert!(!r.errors.is_empty());
    }

    #[test]
    fn overlapping_cones_are_rejected() {
        // Two "sheets" over the same plane: each wall is shared twice but cones overlap.
        let fan = StackyFan::from_i64(
            2,
            &[&[1, 0], &[0, 1], &[-1, 0], &[0, -1], &[1, 1], &[-1, -1]],
            &[&[0, 1], &[1, 2], &[2, 3], &[3, 0], &[0, 4], &[4, 1]],
        );
        assert!(!validate_fan(&fan).is_valid());
    }

    #[test]
    fn json_with_labels() {
        let s = r#"{"dim":1,"stacky_vectors":[[1],[-1]],"max_cones":[[0],[1]],"labels":[3,5]}"#;
        let fan = StackyFan::from_json_str(s).unwrap();
        assert_eq!(fan, p1_35());
        let back = serde_json::to_string(&fan.to_json()).unwrap();
        assert_eq!(StackyFan::from_json_str(&back).unwrap(), fan);
        assert!(matches!(
            StackyFan::from_json_str(r#"{"dim":2,"stacky_vectors":[[1]],"max_cones":[]}"#),
            Err(FanError::Schema(_))
        ));
    }

    #[test]
    fn refinement() {
        assert!(refines(&f2(), &p112()).unwrap());
        assert!(!refines(&p112(), &f2()).unwrap());
    }
}
