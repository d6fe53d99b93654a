//! The I-function with cohomology-valued coefficients in the truncated `p̄` polynomial model.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::exact_math::{ceil_int, fmt_rational, Rational};
use crate::extended_fan::{keff_enumerate, ExtendedFanData, KEffElement};

/// Polynomial in `p̄_1..p̄_r` with rational coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct CohomPoly {
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl CohomPoly {
    pub fn zero() -> Self {
        CohomPoly::default()
    }

    pub fn constant(r: usize, c: Rational) -> Self {
        let mut p = CohomPoly::zero();
        if !c.is_zero() {
            p.terms.insert(vec![0; r], c);
        }
        p
    }

    /// Linear form `Σ c_a p̄_a`.
    pub fn linear(coeffs: &[BigInt]) -> Self {
        let mut p = CohomPoly::zero();
        for (a, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut e = vec![0; coeffs.len()];
                e[a] = 1;
                p.terms.insert(e, Rational::from_integer(c.clone()));
            }
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Rational> {
        &self.terms
    }

    /// Total degree of the highest term.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Coefficient of a monomial.
    pub fn coefficient(&self, exps: &[u32]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut p = CohomPoly::zero();
        if c.is_zero() {
            return p;
        }
        for (e, v) in &self.terms {
            p.terms.insert(e.clone(), v * c);
        }
        p
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (e, v) in &other.terms {
            let slot = self.terms.entry(e.clone()).or_insert_with(Rational::zero);
            *slot += v;
        }
        self.terms.retain(|_, v| !v.is_zero());
    }

    /// Product with terms above total degree `max_degree` dropped.
    pub fn mul_truncated(&self, other: &Self, max_degree: u32) -> Self {
        let mut p = CohomPoly::zero();
        for (e1, v1) in &self.terms {
            let d1: u32 = e1.iter().sum();
            for (e2, v2) in &other.terms {
                let d2: u32 = e2.iter().sum();
                if d1 + d2 > max_degree {
                    continue;
                }
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *p.terms.entry(e).or_insert_with(Rational::zero) += v1 * v2;
            }
        }
        p.terms.retain(|_, v| !v.is_zero());
        p
    }
}

impl fmt::Debug for CohomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, v)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, k)| **k > 0)
                    .map(|(a, k)| if *k == 1 { format!("p{}", a + 1) } else { format!("p{}^{}", a + 1, k) })
                    .collect();
                if mono.is_empty() {
                    fmt_rational(v)
                } else {
                    format!("{}*{}", fmt_rational(v), mono.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// One effective class with its coefficients `z^e ↦ P_e(p̄)` on the sector `ν(d)`.
#[derive(Debug, Clone)]
pub struct IEntry {
    pub element: KEffElement,
    pub coefficients: BTreeMap<i64, CohomPoly>,
}

/// `I = e^{Σ p̄_a log y_a / z} Σ_d y^d · (coefficient) · 1_{ν(d)}` with the prefactor symbolic.
#[derive(Debug, Clone)]
pub struct ISeries {
    pub order: Rational,
    pub z_depth: u32,
    /// Nilpotency bound on the `p̄`-degree (the complex dimension).
    pub nilpotency: u32,
    pub entries: Vec<IEntry>,
}

impl ISeries {
    pub fn entry(&self, coords: &[Rational]) -> Option<&IEntry> {
        self.entries.iter().find(|e| e.element.coords == coords)
    }

    /// Every `(element, polynomial)` at the power `z^e`.
    pub fn at_z_power(&self, e: i64) -> Vec<(&KEffElement, &CohomPoly)> {
        self.entries
            .iter()
            .filter_map(|en| en.coefficients.get(&e).map(|p| (&en.element, p)))
            .collect()
    }
}

/// Factor `c + D̄ x` in the variable `x = 1/z`, stored as a dense list of homogeneous pieces.
fn multiply_linear(series: &mut [CohomPoly], c: &Rational, dbar: &CohomPoly, max_k: usize) {
    for k in (0..=max_k).rev() {
        let mut next = series[k].scale(c);
        if k > 0 {
            next.add_assign(&series[k - 1].mul_truncated(dbar, max_k as u32));
        }
        series[k] = next;
    }
}

/// Divides by `c + D̄ x` with `c ≠ 0`.
fn divide_linear(series: &mut [CohomPoly], c: &Rational, dbar: &CohomPoly, max_k: usize) {
    let inv = Rational::one() / c;
    let step = dbar.scale(&-inv.clone());
    for k in 0..=max_k {
        // s_k ← (s_k − D̄·s'_{k−1}) / c, computed in place from the already-divided prefix.
        let mut v = series[k].clone();
        if k > 0 {
            let prev = series[k - 1].mul_truncated(&step, max_k as u32);
            v = v.scale(&inv);
            v.add_assign(&prev);
        } else {
            v = v.scale(&inv);
        }
        series[k] = v;
    }
}

fn entry_for(ext: &ExtendedFanData, element: KEffElement, z_depth: u32, nilpotency: u32) -> Option<IEntry> {
    let w = element.w.to_i64().expect("small z-weight");
    let max_k_signed = (i64::from(z_depth) - w).min(i64::from(nilpotency));
    if max_k_signed < 0 {
        return None;
    }
    let max_k = max_k_signed as usize;
    let r = ext.r();
    let mut series = vec![CohomPoly::zero(); max_k + 1];
    series[0] = CohomPoly::constant(r, Rational::one());
    for (j, p) in element.pairings.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        let dbar = CohomPoly::linear(&ext.divisor_image(j));
        if p.is_negative() {
            // k ranges over the integers in [p, 0).
            let mut k = ceil_int(p);
            while k < BigInt::zero() {
                let c = p - Rational::from_integer(k.clone());
                if c.is_zero() {
                    // Factor D̄_j · x: shift up one degree.
                    for idx in (0..=max_k).rev() {
                        series[idx] = if idx == 0 {
                            CohomPoly::zero()
                        } else {
                            series[idx - 1].mul_truncated(&dbar, max_k as u32)
                        };
                    }
                } else {
                    multiply_linear(&mut series, &c, &dbar, max_k);
                }
                k += 1;
            }
        } else {
            let mut k = BigInt::zero();
            while Rational::from_integer(k.clone()) < *p {
                let c = p - Rational::from_integer(k.clone());
                divide_linear(&mut series, &c, &dbar, max_k);
                k += 1;
            }
        }
    }
    let mut coefficients = BTreeMap::new();
    for (k, poly) in series.into_iter().enumerate() {
        if !poly.is_zero() {
            coefficients.insert(-w - k as i64, poly);
        }
    }
    Some(IEntry { element, coefficients })
}

/// Computes the I-function through weighted degree `order` and `1/z^{z_depth}`.
pub fn i_function(ext: &ExtendedFanData, order: &Rational, z_depth: u32) -> ISeries {
    let nilpotency = ext.base.dim() as u32;
    let elements = keff_enumerate(ext, order);
    let entries: Vec<IEntry> = elements
        .into_par_iter()
        .filter_map(|e| entry_for(ext, e, z_depth, nilpotency))
        .filter(|e| !e.coefficients.is_empty())
        .collect();
    ISeries { order: order.clone(), z_depth, nilpotency, entries }
}
