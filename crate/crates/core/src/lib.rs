//! Mirror-symmetry computations for compact toric orbifolds.
//!
//! The crate follows the data flow fan → Box → extended fan → I-function → mirror map →
//! superpotentials → open invariants, and verifies open crepant-resolution identities for
//! the weighted projective family P(1,…,1,n).

pub mod exact_math;
pub mod json;
pub mod stacky_fan;
pub mod series_engine;
pub mod extended_fan;
pub mod mirror_engine;
pub mod crc_engine;
