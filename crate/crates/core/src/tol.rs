//! Numerical tolerances shared across the crate.

use serde::{Deserialize, Serialize};

/// Default equality tolerance for utilities and probabilities.
pub const EQ_TOL: f64 = 1e-9;
/// Probabilities above this count as being in the support.
pub const SUPPORT_EPS: f64 = 1e-9;
/// Relative determinant cutoff, scaled by `max|entry|^dim`.
pub const DET_TOL: f64 = 1e-8;
/// Slack allowed on the per-round cap.
pub const CAP_SLACK: f64 = 1e-12;
/// Accuracy required from solved characteristic systems.
pub const SYSTEM_TOL: f64 = 1e-10;
/// Newton convergence threshold on the residual norm.
pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 200;
/// Deviation gains at or below this are not profitable.
pub const GAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub equality: f64,
    pub support: f64,
    pub determinant: f64,
    pub gain: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { equality: EQ_TOL, support: SUPPORT_EPS, determinant: DET_TOL, gain: GAIN_TOL }
    }
}
