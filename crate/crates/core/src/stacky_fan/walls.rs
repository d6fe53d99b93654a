//! Wall curve classes and primitive collections.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{require_valid, FanError, StackyFan};
use crate::exact_math::{cone_index, solve_columns, IntegerMatrix, LatticeVector, Rational};

/// Torus-invariant curve over the wall `τ = σ ∩ σ′`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WallCurve {
    pub wall: Vec<usize>,
    pub cones: (usize, usize),
    pub extra: (usize, usize),
    /// Coefficients `a_j` of the relation `Σ a_j b_j = 0`, one per ray.
    #[serde(serialize_with = "crate::json::ser_rationals")]
    pub relation: Vec<Rational>,
    #[serde(serialize_with = "crate::json::ser_rational")]
    pub c1: Rational,
}

/// Index of the sublattice spanned by `gens` inside its saturation: gcd of maximal minors.
pub(crate) fn face_multiplicity(gens: &[LatticeVector]) -> BigInt {
    if gens.is_empty() {
        return BigInt::from(1);
    }
    let m = IntegerMatrix::from_columns(gens);
    m.smith().diagonal.iter().fold(BigInt::from(1), |acc, d| acc * d)
}

/// One relation per wall. The two rays off the wall get the intersection numbers
/// `mult(τ)/mult(σ)` and `mult(τ)/mult(σ′)`, which are both 1 for smooth cones.
pub fn wall_curve_classes(fan: &StackyFan) -> Result<Vec<WallCurve>, FanError> {
    require_valid(fan)?;
    let m = fan.num_rays();
    let mut out = Vec::new();
    for (wall, cones) in fan.wall_map() {
        let (s, s2) = (cones[0], cones[1]);
        let cone = &fan.max_cones()[s];
        let other = &fan.max_cones()[s2];
        let i = *cone.iter().find(|r| !wall.contains(r)).expect("extra ray");
        let j = *other.iter().find(|r| !wall.contains(r)).expect("extra ray");
        // b_i + x b_j + Σ y_k b_k = 0
        let mut cols = vec![fan.ray(j).to_rational()];
        cols.extend(wall.iter().map(|&k| fan.ray(k).to_rational()));
        let rhs: Vec<Rational> = fan.ray(i).to_rational().iter().map(|c| -c).collect();
        let sol = solve_columns(&cols, &rhs)
            .ok_or_else(|| FanError::InvalidFan(format!("wall {wall:?} has no relation")))?;
        if !sol[0].is_positive() {
            return Err(FanError::InvalidFan(format!("cones across wall {wall:?} overlap")));
        }
        let mult_tau = face_multiplicity(&fan.cone_generators(&wall));
        let mult_sigma = cone_index(&fan.cone_generators(cone))?;
        let scale = Rational::new(mult_tau, mult_sigma);
        let mut relation = vec![Rational::zero(); m];
        relation[i] = scale.clone();
        relation[j] = &sol[0] * &scale;
        for (k, y) in wall.iter().zip(&sol[1..]) {
            relation[*k] = y * &scale;
        }
        let c1 = relation.iter().fold(Rational::zero(), |a, x| a + x);
        out.push(WallCurve { wall, cones: (s, s2), extra: (i, j), relation, c1 });
    }
    Ok(out)
}

/// Minimal ray subsets that do not span a cone.
pub fn primitive_collections(fan: &StackyFan) -> Result<Vec<Vec<usize>>, FanError> {
    require_valid(fan)?;
    let m = fan.num_rays();
    let n = fan.dim();
    let mut out = Vec::new();
    for size in 2..=(n + 1).min(m) {
        for subset in combinations(m, size) {
            if fan.spans_cone(&subset) {
                continue;
            }
            let minimal = (0..size).all(|drop| {
                let sub: Vec<usize> =
                    subset.iter().enumerate().filter(|&(k, _)| k != drop).map(|(_, &r)| r).collect();
                fan.spans_cone(&sub)
            });
            if minimal {
                out.push(subset);
            }
        }
    }
    Ok(out)
}

pub(crate) fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::exact_math::{int, rat};

    #[test]
    fn hirzebruch_walls() {
        let walls = wall_curve_classes(&f2()).unwrap();
        let mut c1: Vec<Rational> = walls.iter().map(|w| w.c1.clone()).collect();
        c1.sort();
        assert_eq!(c1, vec![int(0), int(2), int(2), int(4)]);
        let exc = walls.iter().find(|w| w.wall == vec![3]).unwrap();
        assert_eq!(exc.relation, vec![int(1), int(1), int(0), int(-2)]);
        let fiber = walls.iter().find(|w| w.wall == vec![0]).unwrap();
        assert_eq!(fiber.relation, vec![int(0), int(0), int(1), int(1)]);
    }

    #[test]
    fn plane_walls() {
        for w in wall_curve_classes(&p2()).unwrap() {
            assert_eq!(w.relation, vec![int(1), int(1), int(1)]);
            assert_eq!(w.c1, int(3));
        }
    }

    #[test]
    fn orbifold_wall_uses_intersection_numbers() {
        let walls = wall_curve_classes(&p112()).unwrap();
        // Wall b₁ separates the index-2 cone {b₁,b₂} from the smooth cone {b₃,b₁}.
        let w = walls.iter().find(|w| w.wall == vec![0]).unwrap();
        assert_eq!(w.relation, vec![rat(1, 2), rat(1, 2), int(1)]);
        assert_eq!(w.c1, int(2));
        for w in &walls {
            let (s, t) = w.cones;
            let ms = cone_index(&p112().cone_generators(&p112().max_cones()[s])).unwrap();
            let mt = cone_index(&p112().cone_generators(&p112().max_cones()[t])).unwrap();
            let tau = face_multiplicity(&p112().cone_generators(&w.wall));
            assert_eq!(w.relation[w.extra.0], Rational::new(tau.clone(), ms));
            assert_eq!(w.relation[w.extra.1], Rational::new(tau, mt));
        }
    }

    #[test]
    fn collections() {
        assert_eq!(primitive_collections(&p2()).unwrap(), vec![vec![0, 1, 2]]);
        assert_eq!(primitive_collections(&f2()).unwrap(), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(primitive_collections(&p1()).unwrap(), vec![vec![0, 1]]);
    }
}
