//! Arithmetic dynamics over the rationals.
//!
//! The crate is organized as a stack: exact arithmetic (`exact`), projective
//! points and rational self-maps of P^1 (`proj`), mod-p orbit analysis
//! (`orbit`), prime sweeps over iterate polynomials (`sweep`), preimage
//! forests mod p (`forest`), orbit/subvariety incidence and progression
//! structure (`dml`), and elliptic-curve quotient maps (`lattes`).
//!
//! Everything downstream of `exact` works with immutable values so that
//! prime ranges can be processed in parallel chunks and merged by ascending
//! prime without coordination.

pub mod dml;
pub mod exact;
pub mod forest;
pub mod lattes;
pub mod orbit;
pub mod proj;
pub mod stats;
pub mod sweep;

pub use exact::{Int, Rat};

/// Artifact version stamped into run manifests and cache keys.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
