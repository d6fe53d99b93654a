//! Labeled polytopes and their normal fans.

use std::collections::BTreeSet;

use num_traits::Zero;

use super::walls::combinations;
use super::{validate_fan, FanError, StackyFan};
use crate::exact_math::{rational_rank, solve_columns, LatticeVector, Rational};

/// `P = ∩ {u : ⟨u, b_j⟩ ≥ λ_j}` with stacky normals `b_j = c_j v_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPolytope {
    pub dim: usize,
    pub normals: Vec<LatticeVector>,
    pub offsets: Vec<Rational>,
}

impl LabeledPolytope {
    pub fn new(dim: usize, normals: Vec<LatticeVector>, offsets: Vec<Rational>) -> Self {
        assert_eq!(normals.len(), offsets.len());
        LabeledPolytope { dim, normals, offsets }
    }

    /// `ℓ_j(u) = ⟨u, b_j⟩ − λ_j` for every facet.
    pub fn facet_values(&self, u: &[Rational]) -> Vec<Rational> {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(b, l)| {
                b.coords()
                    .iter()
                    .zip(u)
                    .fold(Rational::zero(), |acc, (c, x)| acc + Rational::from_integer(c.clone()) * x)
                    - l
            })
            .collect()
    }

    pub fn labels(&self) -> Vec<num_bigint::BigInt> {
        self.normals.iter().map(LatticeVector::content).collect()
    }

    /// Vertices with their tight facet sets.
    pub fn vertices(&self) -> Result<Vec<(Vec<Rational>, Vec<usize>)>, FanError> {
        let n = self.dim;
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for subset in combinations(self.normals.len(), n) {
            let rows: Vec<Vec<Rational>> = subset.iter().map(|&j| self.normals[j].to_rational()).collect();
            if rational_rank(&rows) < n {
                continue;
            }
            // Solve ⟨u, b_j⟩ = λ_j: the columns of the transposed system are coordinates.
            let cols: Vec<Vec<Rational>> = (0..n).map(|i| rows.iter().map(|r| r[i].clone()).collect()).collect();
            let rhs: Vec<Rational> = subset.iter().map(|&j| self.offsets[j].clone()).collect();
            let u = solve_columns(&cols, &rhs).expect("independent normals");
            let values = self.facet_values(&u);
            if values.iter().any(|v| *v < Rational::zero()) {
                continue;
            }
            if !seen.insert(u.clone()) {
                continue;
            }
            let tight: Vec<usize> = (0..values.len()).filter(|&j| values[j].is_zero()).collect();
            if tight.len() > n {
                let shown: Vec<String> = u.iter().map(crate::exact_math::fmt_rational).collect();
                return Err(FanError::NonSimpleVertex(format!("({})", shown.join(","))));
            }
            out.push((u, tight));
        }
        Ok(out)
    }
}

/// Normal fan of a simple bounded labeled polytope; ray `j` carries `b_j`.
pub fn polytope_to_fan(p: &LabeledPolytope) -> Result<StackyFan, FanError> {
    let vertices = p.vertices()?;
    if vertices.is_empty() {
        return Err(FanError::UnboundedPolytope);
    }
    let touched: BTreeSet<usize> = vertices.iter().flat_map(|(_, t)| t.iter().copied()).collect();
    if let Some(j) = (0..p.normals.len()).find(|j| !touched.contains(j)) {
        return Err(FanError::RedundantFacet(j));
    }
    let cones: Vec<Vec<usize>> = vertices.into_iter().map(|(_, t)| t).collect();
    let fan = StackyFan::new(p.dim, p.normals.clone(), cones);
    let report = validate_fan(&fan);
    if !report.complete {
        return Err(FanError::UnboundedPolytope);
    }
    if !report.is_valid() {
        return Err(FanError::InvalidFan(report.errors.join("; ")));
    }
    Ok(fan)
}

/// Labeled polytope with offsets `λ`; fails unless its normal fan is `fan`.
pub fn fan_to_polytope(fan: &StackyFan, offsets: &[Rational]) -> Result<LabeledPolytope, FanError> {
    if offsets.len() != fan.num_rays() {
        return Err(FanError::InvalidFan(format!("{} offsets for {} rays", offsets.len(), fan.num_rays())));
    }
    let p = LabeledPolytope::new(fan.dim(), fan.rays().to_vec(), offsets.to_vec());
    let normal = polytope_to_fan(&p)?;
    let a: BTreeSet<&Vec<usize>> = normal.max_cones().iter().collect();
    let b: BTreeSet<&Vec<usize>> = fan.max_cones().iter().collect();
    if a != b {
        return Err(FanError::NotNormalFan);
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{compute_box, disc_area, AreaTarget};
    use super::*;
    use crate::exact_math::{int, rat};

    fn lv(c: &[i64]) -> LatticeVector {
        LatticeVector::from_i64(c)
    }

    fn same_cones(a: &StackyFan, b: &StackyFan) -> bool {
        let x: BTreeSet<&Vec<usize>> = a.max_cones().iter().collect();
        let y: BTreeSet<&Vec<usize>> = b.max_cones().iter().collect();
        a.rays() == b.rays() && x == y
    }

    #[test]
    fn triangle_gives_projective_plane() {
        let p = LabeledPolytope::new(2, vec![lv(&[1, 0]), lv(&[0, 1]), lv(&[-1, -1])], vec![int(0), int(0), int(-1)]);
        assert!(same_cones(&polytope_to_fan(&p).unwrap(), &p2()));
        let u = [rat(1, 3), rat(1, 3)];
        assert_eq!(disc_area(&p, &u, AreaTarget::Ray(2)).unwrap(), rat(1, 3));
        assert_eq!(disc_area(&p, &[int(0), rat(1, 2)], AreaTarget::Ray(0)), Err(FanError::PointNotInterior(0)));
    }

    #[test]
    fn square_gives_product_of_lines() {
        let p = LabeledPolytope::new(
            2,
            vec![lv(&[1, 0]), lv(&[0, 1]), lv(&[-1, 0]), lv(&[0, -1])],
            vec![int(0), int(0), int(-1), int(-1)],
        );
        let fan = polytope_to_fan(&p).unwrap();
        let mut cones: Vec<Vec<usize>> = fan.max_cones().to_vec();
        cones.sort();
        assert_eq!(cones, vec![vec![0, 1], vec![0, 3], vec![1, 2], vec![2, 3]]);
    }

    #[test]
    fn labeled_interval() {
        let p = LabeledPolytope::new(1, vec![lv(&[3]), lv(&[-5])], vec![int(0), int(-5)]);
        let fan = polytope_to_fan(&p).unwrap();
        assert!(same_cones(&fan, &p1_35()));
        assert_eq!(p.labels(), vec![3.into(), 5.into()]);
    }

    #[test]
    fn unbounded_and_degenerate() {
        let quadrant = LabeledPolytope::new(2, vec![lv(&[1, 0]), lv(&[0, 1])], vec![int(0), int(0)]);
        assert_eq!(polytope_to_fan(&quadrant), Err(FanError::UnboundedPolytope));
        let pinched = LabeledPolytope::new(
            2,
            vec![lv(&[1, 0]), lv(&[0, 1]), lv(&[-1, 0]), lv(&[-1, -1])],
            vec![int(0), int(0), int(-1), int(-1)],
        );
        assert!(matches!(polytope_to_fan(&pinched), Err(FanError::NonSimpleVertex(_))));
    }

    #[test]
    fn orbifold_area_is_weighted_sum() {
        let fan = p112();
        let p = fan_to_polytope(&fan, &[int(0), int(0), int(-2)]).unwrap();
        let nu = compute_box(&fan).unwrap().remove(0);
        let u = [rat(1, 2), rat(1, 2)];
        let l1 = disc_area(&p, &u, AreaTarget::Ray(0)).unwrap();
        let l2 = disc_area(&p, &u, AreaTarget::Ray(1)).unwrap();
        assert_eq!(disc_area(&p, &u, AreaTarget::Box(&nu)).unwrap(), (l1 + l2) / int(2));
    }

    #[test]
    fn mismatched_offsets_are_rejected() {
        // Offsets making the F₂ exceptional facet empty.
        assert!(fan_to_polytope(&f2(), &[int(0), int(0), int(-1), int(5)]).is_err());
    }
}
