use thiserror::Error;

use crate::commitment::{Phase, RoundViolation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid mixed profile: {0}")]
    InvalidProfile(String),

    #[error("player {player} has an empty support")]
    EmptySupport { player: usize },

    #[error("profile is not a Nash equilibrium: player {player} gains {gain} by deviating to action {action}")]
    NotEquilibrium { player: usize, action: usize, gain: f64 },

    #[error("degenerate equilibrium: {0}")]
    Degenerate(String),

    #[error("commitment cap must be strictly positive, got {0}")]
    InvalidDelta(f64),

    #[error("illegal round: {0}")]
    Round(RoundViolation),

    #[error("operation requires phase {expected:?}, session is in {found:?}")]
    WrongPhase { expected: Phase, found: Phase },

    #[error("replay failed at step {step}: {source}")]
    Replay { step: usize, source: Box<Error> },

    /// A hypothesis of the requested construction does not hold for the requested construction.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// The construction is well-posed but cannot be carried out (e.g. delta too large).
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<RoundViolation> for Error {
    fn from(v: RoundViolation) -> Self {
        Error::Round(v)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
    }
}
