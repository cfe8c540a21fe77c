//! Coherence of quantum measurements, certified through the classical law
//! of total variance.
//!
//! A reference measurement `x̂` is performed (and its outcome discarded)
//! before a second measurement `ŷ`. Any classical statistical model leaves
//! the statistics of `ŷ` unchanged by that intervention; quantum mechanics
//! does not whenever `ŷ` is coherent with respect to `x̂`. The variance gap
//! [`criterion::delta_v`] quantifies the violation.
//!
//! Modules, bottom-up:
//! - [`linalg`]: small dense complex matrices and a Hermitian eigensolver
//! - [`algebra`]: density matrices, effects, observables, qubit families
//! - [`measurement`]: Born statistics, the Lüders channel, sequential joints
//! - [`criterion`]: the classical laws, ΔV, closed forms, generalizations
//! - [`photonic`]: simulated polarization experiment with a post-selected
//!   controlled-sign gate and Poissonian counting
//! - [`sweep`]: parameter grids and CSV/JSON output used by the CLI

pub mod algebra;
pub mod criterion;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod photonic;
pub mod sweep;

pub use error::{Error, Result};

/// Tolerance for invariants of exactly constructed inputs.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for positivity after accumulated round-off.
pub const COMPUTED_TOL: f64 = 1e-10;
/// Probabilities at or below this are treated as zero-mass branches.
pub const ZERO_PROBABILITY: f64 = 1e-14;
