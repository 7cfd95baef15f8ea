//! Staged side-payment commitment games over finite normal-form games.
//!
//! Players alternate capped commitment rounds (outcome-contingent transfers
//! or money burning) with unanimous continue/stop votes, then play the
//! resulting game. The crate builds commitment schedules that steer play to
//! a target outcome while keeping a punishment equilibrium available after
//! every round, and checks those schedules against unilateral deviations.

// `!(x > 0.0)` is the NaN-rejecting positivity test used throughout
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod catalog;
pub mod commitment;
pub mod equilibria;
pub mod error;
pub mod exec;
pub mod game;
pub mod io;
pub mod poly;
pub mod protocol;
pub mod sample;
pub mod tol;
pub mod verify;

pub use commitment::{CommitmentRound, Mode, Phase, Pledge, Recipient, SessionState, Transcript, Vote};
pub use error::{Error, Result};
pub use exec::Execution;
pub use game::{Game, MixedProfile, OutcomeTarget, TargetRole};
