//! Disc classes, Maslov indices, area functionals and Blaschke-form boundary checks.

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{BoxElement, FanError, LabeledPolytope, StackyFan};
use crate::exact_math::rational::to_f64;
use crate::exact_math::{LatticeVector, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoxTerm {
    pub element: BoxElement,
    pub mult: u64,
}

/// `β = Σ k_j β_j + Σ k_ν β_ν + d` with `d` a sphere class given by a ray relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscClass {
    pub ray_mult: Vec<u64>,
    pub box_terms: Vec<BoxTerm>,
    /// Relation coefficients of the sphere part (`Σ a_j b_j = 0`), one per ray.
    #[serde(serialize_with = "crate::json::ser_rationals")]
    pub sphere: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaslovIndex {
    #[serde(serialize_with = "crate::json::ser_rational")]
    pub chern_weil: Rational,
    #[serde(serialize_with = "crate::json::ser_rational")]
    pub desingularized: Rational,
}

impl DiscClass {
    pub fn zero(m: usize) -> Self {
        DiscClass { ray_mult: vec![0; m], box_terms: Vec::new(), sphere: vec![Rational::zero(); m] }
    }

    pub fn basic_ray(m: usize, j: usize) -> Self {
        let mut d = Self::zero(m);
        d.ray_mult[j] = 1;
        d
    }

    pub fn basic_box(m: usize, element: BoxElement) -> Self {
        let mut d = Self::zero(m);
        d.box_terms.push(BoxTerm { element, mult: 1 });
        d
    }

    pub fn is_basic(&self) -> bool {
        let rays: u64 = self.ray_mult.iter().sum();
        let boxes: u64 = self.box_terms.iter().map(|t| t.mult).sum();
        rays + boxes == 1 && self.sphere.iter().all(Zero::is_zero)
    }

    pub fn boundary(&self, fan: &StackyFan) -> LatticeVector {
        let mut acc = LatticeVector::zero(fan.dim());
        for (j, &k) in self.ray_mult.iter().enumerate() {
            if k > 0 {
                acc = acc.add(&fan.ray(j).scale(&k.into()));
            }
        }
        for t in &self.box_terms {
            acc = acc.add(&t.element.vector.scale(&t.mult.into()));
        }
        acc
    }

    pub fn sphere_c1(&self) -> Rational {
        self.sphere.iter().fold(Rational::zero(), |a, x| a + x)
    }

    /// Rational ray-coefficient vector with box terms expanded via their `t` coefficients.
    pub fn expanded(&self) -> Vec<Rational> {
        let mut out: Vec<Rational> =
            self.ray_mult.iter().zip(&self.sphere).map(|(&k, s)| Rational::from_integer(k.into()) + s).collect();
        for t in &self.box_terms {
            for (r, c) in t.element.cone.iter().zip(&t.element.coefficients) {
                out[*r] += c * Rational::from_integer(t.mult.into());
            }
        }
        out
    }
}

/// `μ_CW = 2Σk_j + 2Σk_ν ι(ν) + 2c₁(d)` and `μ^de = μ_CW − 2Σk_ν ι(ν)`.
pub fn maslov_index_cw(disc: &DiscClass) -> MaslovIndex {
    let two = Rational::from_integer(2.into());
    let rays: u64 = disc.ray_mult.iter().sum();
    let ages = disc
        .box_terms
        .iter()
        .fold(Rational::zero(), |a, t| a + &t.element.age * Rational::from_integer(t.mult.into()));
    let cw = &two * (Rational::from_integer(rays.into()) + &ages + disc.sphere_c1());
    let de = &cw - &two * &ages;
    MaslovIndex { chern_weil: cw, desingularized: de }
}

pub enum AreaTarget<'a> {
    Ray(usize),
    Box(&'a BoxElement),
}

/// `ℓ_a(u) = ⟨u, b_a⟩ − λ_a`, with `ℓ_ν = Σ t_k ℓ_{i_k}`.
pub fn disc_area(p: &LabeledPolytope, u: &[Rational], a: AreaTarget<'_>) -> Result<Rational, FanError> {
    let values = p.facet_values(u);
    if let Some(j) = values.iter().position(|v| !v.is_positive()) {
        return Err(FanError::PointNotInterior(j));
    }
    match a {
        AreaTarget::Ray(j) => Ok(values[j].clone()),
        AreaTarget::Box(e) => {
            Ok(e.cone.iter().zip(&e.coefficients).fold(Rational::zero(), |acc, (&r, t)| acc + t * &values[r]))
        }
    }
}

/// One homogeneous coordinate `w_j = a_j Π (z−α)/(1−ᾱz) · Π ((z−z_i⁺)/(1−z̄_i⁺z))^{t_ij}`.
#[derive(Debug, Clone)]
pub struct BlaschkeComponent {
    pub a: Complex64,
    pub zeros: Vec<Complex64>,
    pub orbi_exponents: Vec<Rational>,
}

#[derive(Debug, Clone)]
pub struct BlaschkeDisc {
    pub orbi_points: Vec<Complex64>,
    pub components: Vec<BlaschkeComponent>,
}

fn factor(z: Complex64, alpha: Complex64) -> Complex64 {
    (z - alpha) / (Complex64::one() - alpha.conj() * z)
}

/// Max over components and boundary samples of `| |w_j(e^{iθ})| − |a_j| |`.
pub fn blaschke_boundary_check(disc: &BlaschkeDisc, samples: usize) -> Result<f64, FanError> {
    let bad = |what: &str, z: Complex64| FanError::InvalidDiscData(format!("{what} {z} has modulus ≥ 1"));
    if let Some(z) = disc.orbi_points.iter().find(|z| z.norm() >= 1.0) {
        return Err(bad("orbifold point", *z));
    }
    for c in &disc.components {
        if let Some(z) = c.zeros.iter().find(|z| z.norm() >= 1.0) {
            return Err(bad("zero", *z));
        }
        if c.orbi_exponents.len() != disc.orbi_points.len() {
            return Err(FanError::InvalidDiscData("one exponent per orbifold point required".into()));
        }
        if c.orbi_exponents.iter().any(|t| t.is_negative() || *t >= Rational::one()) {
            return Err(FanError::InvalidDiscData("orbifold exponents must lie in [0,1)".into()));
        }
    }
    if samples == 0 {
        return Err(FanError::InvalidDiscData("at least one sample required".into()));
    }
    let mut worst = 0.0f64;
    for s in 0..samples {
        let theta = std::f64::consts::TAU * s as f64 / samples as f64;
        let z = Complex64::from_polar(1.0, theta);
        for c in &disc.components {
            let mut w = c.a;
            for &alpha in &c.zeros {
                w *= factor(z, alpha);
            }
            for (&p, t) in disc.orbi_points.iter().zip(&c.orbi_exponents) {
                let b = factor(z, p);
                if !t.is_zero() {
                    w *= b.powf(to_f64(t));
                }
            }
            worst = worst.max((w.norm() - c.a.norm()).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::compute_box;
    use super::*;
    use crate::exact_math::{int, rat};

    #[test]
    fn maslov_of_basic_classes() {
        let fan = p112();
        let nu = compute_box(&fan).unwrap().remove(0);
        assert_eq!(maslov_index_cw(&DiscClass::basic_ray(3, 0)).chern_weil, int(2));
        let m = maslov_index_cw(&DiscClass::basic_box(3, nu.clone()));
        assert_eq!(m.chern_weil, int(2));
        assert_eq!(m.desingularized, int(0));
        let mut half = nu;
        half.age = rat(1, 2);
        let mut sum = DiscClass::basic_ray(3, 1);
        sum.box_terms.push(BoxTerm { element: half, mult: 1 });
        assert_eq!(maslov_index_cw(&sum).chern_weil, int(3));
    }

    #[test]
    fn boundary_of_classes() {
        let fan = p112();
        let nu = compute_box(&fan).unwrap().remove(0);
        let d = DiscClass::basic_box(3, nu);
        assert_eq!(d.boundary(&fan), LatticeVector::from_i64(&[0, 1]));
        assert_eq!(d.expanded(), vec![rat(1, 2), rat(1, 2), int(0)]);
    }

    #[test]
    fn blaschke_trivial_and_orbifold() {
        let unit = BlaschkeDisc {
            orbi_points: vec![],
            components: vec![BlaschkeComponent {
                a: Complex64::one(),
                zeros: vec![Complex64::zero()],
                orbi_exponents: vec![],
            }],
        };
        assert!(blaschke_boundary_check(&unit, 32).unwrap() < 1e-15);
        let orbi = BlaschkeDisc {
            orbi_points: vec![Complex64::new(0.3, 0.0)],
            components: vec![BlaschkeComponent {
                a: Complex64::new(0.7, -0.2),
                zeros: vec![],
                orbi_exponents: vec![rat(1, 2)],
            }],
        };
        assert!(blaschke_boundary_check(&orbi, 64).unwrap() <= 1e-12);
    }

    #[test]
    fn blaschke_rejects_outside_points() {
        let bad = BlaschkeDisc {
            orbi_points: vec![Complex64::new(1.0, 0.0)],
            components: vec![],
        };
        assert!(matches!(blaschke_boundary_check(&bad, 8), Err(FanError::InvalidDiscData(_))));
    }
}
