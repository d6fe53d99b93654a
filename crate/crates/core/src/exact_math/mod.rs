//! Exact integer and rational linear algebra plus the cone geometry used everywhere else.

pub mod lattice;
pub mod rational;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

pub use lattice::{
    hermite_rows, rational_inverse, rational_rank, snf_kernel_basis, solve_columns, solve_integral, IntegerMatrix,
    LatticeVector, Smith,
};
pub use rational::{
    abs, ceil_int, factorial, floor_int, fmt_rational, frac, from_big, int, is_integral, lcm_denominators, parse_rational, rat,
    to_f64, ParseRationalError, Rational,
};

use crate::stacky_fan::StackyFan;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactMathError {
    #[error("matrix rows are dependent (rows {rows}, rank {rank})")]
    RankDeficient { rows: usize, rank: usize },
    #[error("empty matrix")]
    EmptyMatrix,
    #[error("cone generators are linearly dependent")]
    DependentGenerators,
    #[error("no cone of the fan contains {0}")]
    IncompleteFan(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Coefficients `c` with `v = Σ c_k g_k`, present only when all `c_k ≥ 0`.
pub fn cone_coefficients(
    generators: &[LatticeVector],
    v: &[Rational],
) -> Result<Option<Vec<Rational>>, ExactMathError> {
    let cols: Vec<Vec<Rational>> = generators.iter().map(LatticeVector::to_rational).collect();
    if let Some(g) = generators.iter().find(|g| g.dim() != v.len()) {
        return Err(ExactMathError::DimensionMismatch { expected: v.len(), got: g.dim() });
    }
    if rational_rank(&cols) < generators.len() {
        return Err(ExactMathError::DependentGenerators);
    }
    Ok(solve_columns(&cols, v).filter(|c| c.iter().all(|x| !x.is_negative())))
}

/// Smallest cone of `fan` containing `v`: the sorted ray indices carrying strictly positive
/// coefficients, together with those coefficients. The zero vector lies in the empty cone.
pub fn minimal_containing_cone(
    fan: &StackyFan,
    v: &[Rational],
) -> Result<(Vec<usize>, Vec<Rational>), ExactMathError> {
    for cone in fan.max_cones() {
        let gens: Vec<LatticeVector> = cone.iter().map(|&i| fan.ray(i).clone()).collect();
        if let Some(c) = cone_coefficients(&gens, v)? {
            let mut face: Vec<(usize, Rational)> = cone
                .iter()
                .zip(c)
                .filter(|(_, x)| !x.is_zero())
                .map(|(&i, x)| (i, x))
                .collect();
            face.sort_by_key(|(i, _)| *i);
            return Ok(face.into_iter().unzip());
        }
    }
    let shown: Vec<String> = v.iter().map(fmt_rational).collect();
    Err(ExactMathError::IncompleteFan(format!("({})", shown.join(","))))
}

/// `|det(g_1,…,g_n)|`, the order of `N / ⟨g⟩`.
pub fn cone_index(generators: &[LatticeVector]) -> Result<BigInt, ExactMathError> {
    let n = generators.len();
    if let Some(g) = generators.iter().find(|g| g.dim() != n) {
        return Err(ExactMathError::DimensionMismatch { expected: n, got: g.dim() });
    }
    let det = IntegerMatrix::from_columns(generators).determinant();
    if det.is_zero() {
        return Err(ExactMathError::DependentGenerators);
    }
    Ok(det.abs())
}
