//! Enumeration of effective classes by chamber.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::ExtendedFanData;
use crate::exact_math::{ceil_int, frac, LatticeVector, Rational};
use crate::stacky_fan::BoxElement;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KEffElement {
    /// Coordinates in the `d_a` basis.
    #[serde(serialize_with = "crate::json::ser_rationals")]
    pub coords: Vec<Rational>,
    /// `⟨D_j, d⟩` for `j = 1..m'`.
    #[serde(serialize_with = "crate::json::ser_rationals")]
    pub pairings: Vec<Rational>,
    /// `ν(d) = Σ {−⟨D_j,d⟩} b_j`; `None` is the untwisted sector.
    pub nu: Option<BoxElement>,
    /// `w(d) = Σ_j ⌈⟨D_j,d⟩⌉`.
    #[serde(serialize_with = "ser_bigint")]
    pub w: BigInt,
    #[serde(serialize_with = "crate::json::ser_rationals")]
    pub lambda: Vec<Rational>,
    #[serde(serialize_with = "crate::json::ser_rationals")]
    pub mu: Vec<Rational>,
    #[serde(serialize_with = "crate::json::ser_rational")]
    pub weight: Rational,
}

fn ser_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl KEffElement {
    pub fn is_untwisted(&self) -> bool {
        self.nu.is_none()
    }

    /// `ν(d)` as a lattice vector, zero when untwisted.
    pub fn nu_vector(&self, dim: usize) -> LatticeVector {
        self.nu.as_ref().map_or_else(|| LatticeVector::zero(dim), |e| e.vector.clone())
    }
}

impl ExtendedFanData {
    /// Membership by the anticone rule: the pairings outside `ℤ_{≥0}` sit on base rays
    /// spanning a cone of the fan.
    pub fn is_effective(&self, coords: &[Rational]) -> bool {
        let p = self.pairings(coords);
        let failing: Vec<usize> =
            (0..p.len()).filter(|&j| !(p[j].is_integer() && !p[j].is_negative())).collect();
        failing.iter().all(|&j| j < self.m()) && self.base.spans_cone(&failing)
    }

    /// Full element data for basis coordinates `coords`.
    pub fn keff_element(&self, coords: Vec<Rational>, box_elements: &[BoxElement]) -> KEffElement {
        let pairings = self.pairings(&coords);
        let dim = self.base.dim();
        let mut nu_vec = vec![Rational::zero(); dim];
        for (j, pj) in pairings.iter().enumerate() {
            let f = frac(&-pj);
            if f.is_zero() {
                continue;
            }
            for (slot, c) in nu_vec.iter_mut().zip(self.vector(j).coords()) {
                *slot += &f * Rational::from_integer(c.clone());
            }
        }
        let nu_lattice = LatticeVector::from_rational(&nu_vec).expect("ν(d) is a lattice point");
        let nu = if nu_lattice.is_zero() {
            None
        } else {
            Some(
                box_elements
                    .iter()
                    .find(|e| e.vector == nu_lattice)
                    .cloned()
                    .expect("ν(d) lies in the Box"),
            )
        };
        let w = pairings.iter().fold(BigInt::zero(), |acc, p| acc + ceil_int(p));
        let (lambda, mu) = self.adapted(&coords);
        let weight = lambda.iter().chain(mu.iter()).fold(Rational::zero(), |acc, x| acc + x);
        KEffElement { coords, pairings, nu, w, lambda, mu, weight }
    }
}

/// All effective classes of weighted degree at most `bound`, sorted by basis coordinates.
pub fn keff_enumerate(ext: &ExtendedFanData, bound: &Rational) -> Vec<KEffElement> {
    let box_elements = crate::stacky_fan::compute_box(&ext.base).expect("valid base fan");
    let found: Vec<Vec<Vec<Rational>>> = ext
        .base
        .max_cones()
        .par_iter()
        .map(|cone| {
            let gens: Vec<Vec<Rational>> = ext.chamber_generators(cone).into_iter().map(|(_, e)| e).collect();
            let weights: Vec<Rational> = gens.iter().map(|g| ext.weight(g)).collect();
            let mut out = Vec::new();
            let mut current = vec![Rational::zero(); ext.r_ext()];
            walk(&gens, &weights, 0, bound, &mut current, &mut out);
            out
        })
        .collect();
    let mut unique: BTreeMap<Vec<Rational>, ()> = BTreeMap::new();
    for coords in found.into_iter().flatten() {
        unique.insert(coords, ());
    }
    unique.into_keys().map(|c| ext.keff_element(c, &box_elements)).collect()
}

fn walk(
    gens: &[Vec<Rational>],
    weights: &[Rational],
    i: usize,
    budget: &Rational,
    current: &mut Vec<Rational>,
    out: &mut Vec<Vec<Rational>>,
) {
    if i == gens.len() {
        out.push(current.clone());
        return;
    }
    let mut left = budget.clone();
    let mut steps = 0usize;
    loop {
        walk(gens, weights, i + 1, &left, current, out);
        left -= &weights[i];
        if left.is_negative() {
            break;
        }
        for (c, g) in current.iter_mut().zip(&gens[i]) {
            *c += g;
        }
        steps += 1;
    }
    for (c, g) in current.iter_mut().zip(&gens[i]) {
        *c -= g * Rational::from_integer(steps.into());
    }
}
