//! Extended stacky fans, the kernel lattice 𝕃 with its adapted basis, and effective classes.

mod keff;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::exact_math::{
    frac, lcm_denominators, rational_inverse, snf_kernel_basis, solve_columns, solve_integral, ExactMathError,
    IntegerMatrix, LatticeVector, Rational,
};
use crate::stacky_fan::{compute_box, require_valid, wall_curve_classes, BoxElement, FanError, StackyFan};

pub use keff::{keff_enumerate, KEffElement};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtendedError {
    #[error("the extended stacky vectors do not generate N")]
    LatticeNotGenerated,
    #[error("no admissible kernel basis: {0}")]
    BasisShapeInfeasible(String),
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Math(#[from] ExactMathError),
}

/// Base fan plus the age-≤1 Box vectors, with a basis `d_1..d_{r'}` of 𝕃 such that
/// `d_1..d_r` span the base relations and `d_b` (b > r) is `δ_b + Σ λ_{ba} d_a`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtendedFanData {
    #[serde(skip)]
    pub base: StackyFan,
    /// `b_{m+1}..b_{m'}`.
    pub extra: Vec<BoxElement>,
    /// `d_a` as integer vectors of length `m'`.
    pub basis: Vec<LatticeVector>,
    /// `λ_{ba}` for every extended basis vector (rows) and base basis vector (columns).
    #[serde(serialize_with = "ser_matrix")]
    pub lifts: Vec<Vec<Rational>>,
    /// `δ_b`: extended coordinate 1, base coordinates minus the Box coefficients.
    #[serde(serialize_with = "ser_matrix")]
    pub deltas: Vec<Vec<Rational>>,
}

fn ser_matrix<S: serde::Serializer>(m: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.len()))?;
    for row in m {
        let shown: Vec<String> = row.iter().map(crate::exact_math::fmt_rational).collect();
        seq.serialize_element(&shown)?;
    }
    seq.end()
}

impl ExtendedFanData {
    /// Number of base rays `m`.
    pub fn m(&self) -> usize {
        self.base.num_rays()
    }

    /// Number of extended vectors `m'`.
    pub fn m_ext(&self) -> usize {
        self.base.num_rays() + self.extra.len()
    }

    /// Rank `r = m − n` of the base relations.
    pub fn r(&self) -> usize {
        self.m() - self.base.dim()
    }

    /// Rank `r' = m' − n` of 𝕃.
    pub fn r_ext(&self) -> usize {
        self.basis.len()
    }

    pub fn vector(&self, j: usize) -> &LatticeVector {
        if j < self.m() {
            self.base.ray(j)
        } else {
            &self.extra[j - self.m()].vector
        }
    }

    pub fn vectors(&self) -> Vec<LatticeVector> {
        (0..self.m_ext()).map(|j| self.vector(j).clone()).collect()
    }

    /// `d_{aj}`.
    pub fn d(&self, a: usize, j: usize) -> &BigInt {
        &self.basis[a].coords()[j]
    }

    /// `D_j` in the dual basis `p_1..p_{r'}`.
    pub fn divisor_class(&self, j: usize) -> Vec<BigInt> {
        (0..self.r_ext()).map(|a| self.d(a, j).clone()).collect()
    }

    /// `D̄_j` in the basis `p̄_1..p̄_r`; zero for extended indices.
    pub fn divisor_image(&self, j: usize) -> Vec<BigInt> {
        if j >= self.m() {
            return vec![BigInt::zero(); self.r()];
        }
        (0..self.r()).map(|a| self.d(a, j).clone()).collect()
    }

    /// `⟨D_j, d⟩` for all `j`, with `d` given in the `d_a` basis.
    pub fn pairings(&self, coords: &[Rational]) -> Vec<Rational> {
        (0..self.m_ext())
            .map(|j| {
                coords
                    .iter()
                    .enumerate()
                    .fold(Rational::zero(), |acc, (a, c)| acc + c * Rational::from_integer(self.d(a, j).clone()))
            })
            .collect()
    }

    /// Adapted coordinates `(λ, μ)` with `d = Σ λ_a d_a + Σ μ_b δ_b`.
    pub fn adapted(&self, coords: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
        let r = self.r();
        let mu: Vec<Rational> = coords[r..].to_vec();
        let lambda = (0..r)
            .map(|a| {
                mu.iter().zip(&self.lifts).fold(coords[a].clone(), |acc, (m, l)| acc + m * &l[a])
            })
            .collect();
        (lambda, mu)
    }

    /// Weighted degree `Σ λ_a + Σ μ_b` used for every truncation.
    pub fn weight(&self, coords: &[Rational]) -> Rational {
        let (lambda, mu) = self.adapted(coords);
        lambda.iter().chain(mu.iter()).fold(Rational::zero(), |acc, x| acc + x)
    }

    /// Basis coordinates of the class dual to the max cone `cone` and index `j ∉ cone`:
    /// pairs to 1 with `D_j` and to 0 with every other `D_k`, `k ∉ cone`.
    pub fn chamber_generators(&self, cone: &[usize]) -> Vec<(usize, Vec<Rational>)> {
        let outside: Vec<usize> = (0..self.m_ext()).filter(|j| !cone.contains(j)).collect();
        let rows: Vec<Vec<Rational>> = outside
            .iter()
            .map(|&k| (0..self.r_ext()).map(|a| Rational::from_integer(self.d(a, k).clone())).collect())
            .collect();
        let inv = rational_inverse(&rows).expect("cone complement pairs nondegenerately");
        outside
            .iter()
            .enumerate()
            .map(|(col, &j)| (j, (0..self.r_ext()).map(|a| inv[a][col].clone()).collect()))
            .collect()
    }

    /// Denominator bound of each `λ_a` over the effective classes.
    pub fn lambda_denominators(&self) -> Vec<u32> {
        let mut dens = vec![BigInt::one(); self.r()];
        for cone in self.base.max_cones() {
            for (_, e) in self.chamber_generators(cone) {
                let (lambda, _) = self.adapted(&e);
                for (d, l) in dens.iter_mut().zip(&lambda) {
                    *d = d.lcm(l.denom());
                }
            }
        }
        dens.iter().map(|d| d.to_u32().expect("small denominator")).collect()
    }
}

/// Builds the extended stacky fan of `fan` from its Box elements of age at most 1.
pub fn build_extended(fan: &StackyFan) -> Result<ExtendedFanData, ExtendedError> {
    require_valid(fan)?;
    let n = fan.dim();
    let m = fan.num_rays();
    let extra: Vec<BoxElement> =
        compute_box(fan)?.into_iter().filter(|e| e.age <= Rational::one()).collect();
    let mut all: Vec<LatticeVector> = fan.rays().to_vec();
    all.extend(extra.iter().map(|e| e.vector.clone()));
    let full = IntegerMatrix::from_columns(&all);
    let s = full.smith();
    if s.diagonal.len() < n || s.diagonal.iter().any(|d| !d.is_one()) {
        return Err(ExtendedError::LatticeNotGenerated);
    }

    let base_matrix = IntegerMatrix::from_columns(fan.rays());
    let nef = nef_basis(fan, &base_matrix)?;
    let m_ext = all.len();
    let r = nef.len();

    let mut basis: Vec<LatticeVector> = nef
        .iter()
        .map(|v| {
            let mut c = v.coords().to_vec();
            c.resize(m_ext, BigInt::zero());
            LatticeVector::new(c)
        })
        .collect();
    let nef_cols: Vec<Vec<Rational>> = nef.iter().map(LatticeVector::to_rational).collect();
    let mut lifts = Vec::new();
    let mut deltas = Vec::new();
    for (k, e) in extra.iter().enumerate() {
        let x = solve_integral(&base_matrix, &e.vector.neg()).ok_or_else(|| {
            ExtendedError::BasisShapeInfeasible(format!("base rays do not reach {}", e.vector))
        })?;
        // x + t lies in the rational span of the base relations.
        let shifted: Vec<Rational> =
            (0..m).map(|j| Rational::from_integer(x.coords()[j].clone()) + e.coefficient_of(j)).collect();
        let lambda: Vec<Rational> = if r == 0 {
            Vec::new()
        } else {
            solve_columns(&nef_cols, &shifted).expect("relation lies in the base kernel").iter().map(frac).collect()
        };
        let mut delta: Vec<Rational> = (0..m).map(|j| -e.coefficient_of(j)).collect();
        delta.resize(m_ext, Rational::zero());
        delta[m + k] = Rational::one();
        let mut d_b = delta.clone();
        for (a, l) in lambda.iter().enumerate() {
            for (j, c) in nef[a].coords().iter().enumerate() {
                d_b[j] += l * Rational::from_integer(c.clone());
            }
        }
        basis.push(LatticeVector::from_rational(&d_b).expect("lift is integral"));
        lifts.push(lambda);
        deltas.push(delta);
    }
    for d in &basis {
        let mut sum = LatticeVector::zero(n);
        for (j, c) in d.coords().iter().enumerate() {
            sum = sum.add(&all[j].scale(c));
        }
        debug_assert!(sum.is_zero());
    }
    let ext = ExtendedFanData { base: fan.clone(), extra, basis, lifts, deltas };
    for cone in fan.max_cones() {
        for (j, e) in ext.chamber_generators(cone) {
            if ext.weight(&e) <= Rational::zero() {
                return Err(ExtendedError::BasisShapeInfeasible(format!(
                    "effective generator for cone {cone:?}, index {j} has nonpositive weight"
                )));
            }
        }
    }
    Ok(ext)
}

/// Primitive wall-curve relations forming a ℤ-basis of the base relations, with every wall
/// class a nonnegative combination; the first such subset in decreasing lexicographic order.
fn nef_basis(fan: &StackyFan, base_matrix: &IntegerMatrix) -> Result<Vec<LatticeVector>, ExtendedError> {
    let m = fan.num_rays();
    let r = m - fan.dim();
    if r == 0 {
        return Ok(Vec::new());
    }
    let kernel = snf_kernel_basis(base_matrix)?;
    let kernel_cols: Vec<Vec<Rational>> = kernel.iter().map(LatticeVector::to_rational).collect();
    let mut candidates: Vec<LatticeVector> = Vec::new();
    for w in wall_curve_classes(fan)? {
        let scale = lcm_denominators(&w.relation);
        let scaled: Vec<Rational> = w.relation.iter().map(|x| x * Rational::from_integer(scale.clone())).collect();
        let (prim, _) = LatticeVector::from_rational(&scaled).expect("cleared denominators").primitive_part();
        if !candidates.contains(&prim) {
            candidates.push(prim);
        }
    }
    candidates.sort_by(|a, b| b.coords().cmp(a.coords()));
    let coords: Vec<Vec<Rational>> = candidates
        .iter()
        .map(|c| solve_columns(&kernel_cols, &c.to_rational()).expect("wall relation in kernel"))
        .collect();
    for subset in crate::stacky_fan::combinations(candidates.len(), r) {
        let rows: Vec<Vec<Rational>> = subset.iter().map(|&i| coords[i].clone()).collect();
        let mat: Vec<Vec<BigInt>> = rows.iter().map(|row| row.iter().map(|x| x.to_integer()).collect()).collect();
        if !IntegerMatrix::from_rows(&mat).determinant().abs().is_one() {
            continue;
        }
        let chosen: Vec<Vec<Rational>> = subset.iter().map(|&i| candidates[i].to_rational()).collect();
        let positive = candidates.iter().all(|c| {
            solve_columns(&chosen, &c.to_rational()).is_some_and(|x| x.iter().all(|v| !v.is_negative()))
        });
        if positive {
            return Ok(subset.iter().map(|&i| candidates[i].clone()).collect());
        }
    }
    Err(ExtendedError::BasisShapeInfeasible("wall classes contain no positive ℤ-basis".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stacky_fan::fixtures::*;

    fn lv(c: &[i64]) -> LatticeVector {
        LatticeVector::from_i64(c)
    }

    #[test]
    fn weighted_projective_basis() {
        for n in 2..=4usize {
            let ext = build_extended(&weighted(n)).unwrap();
            assert_eq!(ext.m_ext(), n + 2);
            let mut nu = vec![0i64; n];
            nu[n - 1] = 1;
            assert_eq!(ext.extra[0].vector, lv(&nu));
            let mut d1 = vec![1i64; n + 2];
            d1[n] = n as i64;
            d1[n + 1] = 0;
            let mut d2 = vec![0i64; n + 2];
            d2[n] = 1;
            d2[n + 1] = 1;
            assert_eq!(ext.basis, vec![lv(&d1), lv(&d2)]);
            assert_eq!(ext.lifts, vec![vec![Rational::new(1.into(), (n as i64).into())]]);
        }
    }

    #[test]
    fn plane_and_hirzebruch() {
        let p2 = build_extended(&p2()).unwrap();
        assert_eq!(p2.basis, vec![lv(&[1, 1, 1])]);
        let f2 = build_extended(&f2()).unwrap();
        assert_eq!(f2.basis, vec![lv(&[1, 1, 0, -2]), lv(&[0, 0, 1, 1])]);
        assert!(f2.extra.is_empty());
    }

    #[test]
    fn relations_hold() {
        for fan in [p2(), p112(), f2(), p1(), p1_35(), weighted(3)] {
            let ext = build_extended(&fan).unwrap();
            for d in &ext.basis {
                let mut sum = LatticeVector::zero(fan.dim());
                for (j, c) in d.coords().iter().enumerate() {
                    sum = sum.add(&ext.vector(j).scale(c));
                }
                assert!(sum.is_zero());
                for a in 0..ext.r() {
                    for j in ext.m()..ext.m_ext() {
                        assert!(ext.d(a, j).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn extended_vectors_outside_the_ray_lattice() {
        // Rays ±2 reach only 2ℤ, so ±1 have no integral lift with identity extended part.
        let fan = StackyFan::from_i64(1, &[&[2], &[-2]], &[&[0], &[1]]);
        assert!(matches!(build_extended(&fan), Err(ExtendedError::BasisShapeInfeasible(_))));
        assert!(build_extended(&StackyFan::from_i64(1, &[&[3], &[-2]], &[&[0], &[1]])).is_ok());
    }
}
