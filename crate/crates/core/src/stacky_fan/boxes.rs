//! Box elements (twisted sectors) and the Gorenstein test.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::{require_valid, FanError, StackyFan};
use crate::exact_math::rational::{frac, is_integral};
use crate::exact_math::{rational_inverse, ExactMathError, LatticeVector, Rational};

/// Nonzero lattice point `ν = Σ t_k b_{i_k}` with `t_k ∈ (0,1)` over its minimal cone.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BoxElement {
    pub vector: LatticeVector,
    pub cone: Vec<usize>,
    #[serde(serialize_with = "crate::json::ser_rationals")]
    pub coefficients: Vec<Rational>,
    #[serde(serialize_with = "crate::json::ser_rational")]
    pub age: Rational,
}

impl BoxElement {
    /// `t` coefficient on ray `j` (zero off the supporting cone).
    pub fn coefficient_of(&self, j: usize) -> Rational {
        self.cone
            .iter()
            .position(|&i| i == j)
            .map_or_else(Rational::zero, |k| self.coefficients[k].clone())
    }
}

/// All `t ∈ [0,1)^n` with `Σ t_k g_k` integral, including `t = 0`; there are `|det g|` of them.
pub fn box_of_cone(generators: &[LatticeVector]) -> Result<Vec<Vec<Rational>>, ExactMathError> {
    let n = generators.len();
    // Column k of the inverse holds the coordinates of e_k in the generator basis.
    let rows: Vec<Vec<Rational>> =
        (0..n).map(|i| generators.iter().map(|g| Rational::from_integer(g[i].clone())).collect()).collect();
    let inv = rational_inverse(&rows).ok_or(ExactMathError::DependentGenerators)?;
    let steps: Vec<Vec<Rational>> =
        (0..n).map(|k| (0..n).map(|i| frac(&inv[i][k])).collect()).collect();
    let zero = vec![Rational::zero(); n];
    let mut seen: BTreeSet<Vec<Rational>> = BTreeSet::from([zero.clone()]);
    let mut frontier = vec![zero];
    while let Some(t) = frontier.pop() {
        for s in &steps {
            let next: Vec<Rational> = t.iter().zip(s).map(|(a, b)| frac(&(a + b))).collect();
            if seen.insert(next.clone()) {
                frontier.push(next);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Box′: nonzero Box elements of all cones, keyed by vector, ordered lexicographically.
pub fn compute_box(fan: &StackyFan) -> Result<Vec<BoxElement>, FanError> {
    require_valid(fan)?;
    let per_cone: Vec<Vec<BoxElement>> = fan
        .max_cones()
        .par_iter()
        .map(|cone| {
            let gens = fan.cone_generators(cone);
            let pts = box_of_cone(&gens)?;
            Ok(pts
                .into_iter()
                .filter(|t| t.iter().any(|x| !x.is_zero()))
                .map(|t| element_from(fan, cone, &t))
                .collect())
        })
        .collect::<Result<_, ExactMathError>>()?;
    let mut merged: BTreeMap<LatticeVector, BoxElement> = BTreeMap::new();
    for e in per_cone.into_iter().flatten() {
        merged.entry(e.vector.clone()).or_insert(e);
    }
    Ok(merged.into_values().collect())
}

fn element_from(fan: &StackyFan, cone: &[usize], t: &[Rational]) -> BoxElement {
    let n = fan.dim();
    let mut sum = vec![Rational::zero(); n];
    let mut support = Vec::new();
    let mut coefficients = Vec::new();
    for (&r, tk) in cone.iter().zip(t) {
        if tk.is_zero() {
            continue;
        }
        for (s, g) in sum.iter_mut().zip(fan.ray(r).coords()) {
            *s += tk * Rational::from_integer(g.clone());
        }
        support.push(r);
        coefficients.push(tk.clone());
    }
    let age = coefficients.iter().fold(Rational::zero(), |a, x| a + x);
    let vector = LatticeVector::from_rational(&sum).expect("box point is integral");
    BoxElement { vector, cone: support, coefficients, age }
}

/// True iff every Box element has integral age.
pub fn is_gorenstein(fan: &StackyFan) -> Result<bool, FanError> {
    Ok(compute_box(fan)?.iter().all(|e| is_integral(&e.age)))
}

/// Elements of Box′ lying in the given maximal cone (any face).
pub fn box_elements_in_cone<'a>(elements: &'a [BoxElement], cone: &[usize]) -> Vec<&'a BoxElement> {
    elements.iter().filter(|e| e.cone.iter().all(|r| cone.contains(r))).collect()
}
