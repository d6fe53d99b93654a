//! I-function, mirror maps, Hori–Vafa and Lagrangian Floer superpotentials, and open
//! Gromov–Witten invariants.
//!
//! B-side series use adapted coordinates: `y_1..y_r` for the base classes (fractional
//! exponents allowed) and `u_b = y_b · y^{−λ_b}` for every extended vector. A-side series use
//! `q_1..q_r` and `τ_b`. Both rosters give every variable weight 1.

mod bridge;
mod ifunction;
mod mirror_map;
mod potential;

use std::sync::Arc;

use crate::extended_fan::{ExtendedError, ExtendedFanData};
use crate::series_engine::{Roster, SeriesError, Var};
use crate::stacky_fan::FanError;

pub use bridge::{open_closed_bridge, BridgeCheck, BridgeReport};
pub use ifunction::{i_function, CohomPoly, IEntry, ISeries};
pub use mirror_map::{mirror_map, mirror_map_from, MirrorMap};
pub use potential::{
    default_gauge, extract_open_gw, hori_vafa, lf_from_map, lf_superpotential, theorem_status, Chart, OpenGWEntry, OpenGWTable,
    Potential, PotentialJson, PotentialTerm, TermJson,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MirrorError {
    #[error("mirror map shape violation: {0}")]
    MirrorShapeViolation(String),
    #[error("gauge constraints cannot be solved: {0}")]
    GaugeUnsolvable(String),
    #[error("basic open invariant differs from 1 for term {0}")]
    BasicNotOne(usize),
    #[error("fan is not Gorenstein")]
    NotGorenstein,
    #[error("fan fails the Fano check: {0}")]
    NotFano(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Extended(#[from] ExtendedError),
    #[error(transparent)]
    Fan(#[from] FanError),
}

/// `y_1..y_r, u_{r+1}..u_{r'}`.
pub fn b_roster(ext: &ExtendedFanData) -> Arc<Roster> {
    let dens = ext.lambda_denominators();
    let mut vars: Vec<Var> = (0..ext.r()).map(|a| Var::exponentiated(&format!("y{}", a + 1), dens[a])).collect();
    vars.extend((ext.r()..ext.r_ext()).map(|b| Var::formal(&format!("u{}", b + 1))));
    Roster::new(vars)
}

/// `q_1..q_r, τ_{r+1}..τ_{r'}`, the same shape as [`b_roster`].
pub fn a_roster(ext: &ExtendedFanData) -> Arc<Roster> {
    let dens = ext.lambda_denominators();
    let mut vars: Vec<Var> = (0..ext.r()).map(|a| Var::exponentiated(&format!("q{}", a + 1), dens[a])).collect();
    vars.extend((ext.r()..ext.r_ext()).map(|b| Var::formal(&format!("tau{}", b + 1))));
    Roster::new(vars)
}
