//! The compactification X̄ attached to a basic disc class.

use serde::Serialize;

use super::{require_valid, DiscClass, FanError, StackyFan};
use crate::exact_math::{minimal_containing_cone, LatticeVector, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct XBar {
    #[serde(skip)]
    pub fan: StackyFan,
    /// Ray of X̄ carrying `b_∞`.
    pub infinity_ray: usize,
    /// True when `b_∞` replaced the stacky vector of an existing ray.
    pub replaced: bool,
    pub b_infinity: LatticeVector,
    /// `β̄ = β + β_∞` as a disc class of X̄ (boundary zero).
    pub beta_bar: DiscClass,
}

/// Builds X̄ from `b_∞ = −∂β`: either relabels the ray through `b_∞` or star-subdivides
/// every cone containing the minimal cone of `b_∞`.
pub fn star_subdivide_xbar(fan: &StackyFan, beta: &DiscClass) -> Result<XBar, FanError> {
    require_valid(fan)?;
    if !beta.is_basic() || beta.ray_mult.len() != fan.num_rays() {
        return Err(FanError::NonBasicClass);
    }
    let b0 = beta.boundary(fan);
    let b_inf = b0.neg();
    let (face, _) = minimal_containing_cone(fan, &b_inf.to_rational())?;
    let m = fan.num_rays();

    let (xfan, infinity_ray, replaced) = if face.len() == 1 {
        let i = face[0];
        let mut rays = fan.rays().to_vec();
        rays[i] = b_inf.clone();
        (StackyFan::new(fan.dim(), rays, fan.max_cones().to_vec()), i, true)
    } else {
        let mut rays = fan.rays().to_vec();
        rays.push(b_inf.clone());
        let mut cones = Vec::new();
        for cone in fan.max_cones() {
            if face.iter().all(|r| cone.contains(r)) {
                for drop in &face {
                    let mut c: Vec<usize> = cone.iter().copied().filter(|r| r != drop).collect();
                    c.push(m);
                    cones.push(c);
                }
            } else {
                cones.push(cone.clone());
            }
        }
        (StackyFan::new(fan.dim(), rays, cones), m, false)
    };
    require_valid(&xfan).map_err(|e| FanError::IncompleteFan(e.to_string()))?;

    let mbar = xfan.num_rays();
    let mut beta_bar = DiscClass::zero(mbar);
    beta_bar.ray_mult[..m].copy_from_slice(&beta.ray_mult);
    beta_bar.box_terms = beta.box_terms.clone();
    beta_bar.sphere = vec![Rational::from_integer(0.into()); mbar];
    beta_bar.ray_mult[infinity_ray] += 1;
    debug_assert!(beta_bar.boundary(&xfan).is_zero());
    Ok(XBar { fan: xfan, infinity_ray, replaced, b_infinity: b_inf, beta_bar })
}
