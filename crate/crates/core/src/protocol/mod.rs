//! Plan builders: explicit on-path commitment schedules that make a target
//! outcome an equilibrium while a punishment stays available.

mod classify;
mod compile;
mod multiplayer;
mod partial;
mod plan;
mod two_by_two;
mod two_player;
mod welfare;

pub use classify::{classify_case, shape_case};
pub use compile::{chunk_burns, compile_elementary, incentive_burns, merge_tracks, opponent_profiles, with_action, ElementaryCommitment, Relabeling};
pub use multiplayer::{build_multiplayer_plan, gradient_neutral_array};
pub use partial::{auxiliary_outcome, build_partial_support_plan, build_partial_unchecked};
pub use plan::{CaseTag, Checkpoint, PlanStage, ProtocolPlan};
pub use two_by_two::{build_two_by_two_plan, delta_bound as two_by_two_delta_bound, incentive_pair, incentive_type, IncentiveType};
pub use two_player::{build_two_player_plan, first_column_operations, RowOperation};
pub use welfare::{build_welfare_plan, build_welfare_transfer_stage, check_welfare_target, Compensation, WelfarePath};

use crate::error::Result;
use crate::game::{Game, MixedProfile};

/// Classifies `(sigma, target)` and runs the matching builder.
pub fn build_improvement_plan(game: &Game, sigma: &MixedProfile, target: &[usize], delta: f64) -> Result<ProtocolPlan> {
    match classify_case(game, sigma, target)? {
        CaseTag::PartialSupportDisjoint | CaseTag::PartialSupportMixed | CaseTag::InSupportIndirect => {
            build_partial_support_plan(game, sigma, target, delta)
        }
        CaseTag::TwoByTwo => build_two_by_two_plan(game, sigma, target, delta),
        CaseTag::FullSupport2p => build_two_player_plan(game, sigma, target, delta),
        CaseTag::FullSupportNp => build_multiplayer_plan(game, sigma, target, delta),
        CaseTag::WelfareTransferStage => unreachable!("never produced by classification"),
    }
}
