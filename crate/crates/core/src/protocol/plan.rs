use serde::{Deserialize, Serialize};

use crate::commitment::{validate_round, CommitmentRound, Mode};
use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile, OutcomeTarget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    PartialSupportDisjoint,
    PartialSupportMixed,
    InSupportIndirect,
    FullSupport2p,
    FullSupportNp,
    TwoByTwo,
    WelfareTransferStage,
}

impl CaseTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::PartialSupportDisjoint => "partial_support_disjoint",
            CaseTag::PartialSupportMixed => "partial_support_mixed",
            CaseTag::InSupportIndirect => "in_support_indirect",
            CaseTag::FullSupport2p => "full_support_2p",
            CaseTag::FullSupportNp => "full_support_np",
            CaseTag::TwoByTwo => "two_by_two",
            CaseTag::WelfareTransferStage => "welfare_transfer_stage",
        }
    }
}

/// A contiguous block of rounds sharing one punishment rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStage {
    pub case: CaseTag,
    /// Rounds `from_round..to_round` (0-based, exclusive end) belong here;
    /// the stage governs checkpoints `from_round..=to_round`.
    pub from_round: usize,
    pub to_round: usize,
    /// Equilibrium the stage keeps available as punishment.
    pub baseline: MixedProfile,
    pub reference_support: Vec<Vec<usize>>,
    /// Per-player payoff bound the punishment must respect.
    pub ceiling: Vec<f64>,
    /// Whether a pure equilibrium may stand in when the same-support solve fails.
    pub pure_fallback: bool,
    /// Whether `baseline` itself stays an equilibrium throughout the stage
    /// (otherwise the punishment is recomputed at every checkpoint).
    pub baseline_fixed: bool,
    /// Whether payoffs at the plan target must stay unchanged in this stage.
    pub target_fixed: bool,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    /// Number of rounds applied.
    pub round: usize,
    pub game_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolPlan {
    pub case_tag: CaseTag,
    pub delta: f64,
    pub mode: Mode,
    pub base_hash: String,
    /// Relabeling used by the main construction (`perms[i][new] = old`);
    /// rounds always use the original labels.
    pub permutation: Vec<Vec<usize>>,
    pub rounds: Vec<CommitmentRound>,
    pub target: OutcomeTarget,
    pub baseline: MixedProfile,
    pub stages: Vec<PlanStage>,
    pub checkpoints: Vec<Checkpoint>,
    pub expected_terminal_payoffs: Vec<f64>,
}

impl ProtocolPlan {
    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }

    /// Stage governing checkpoint `k` (and the round played from it).
    pub fn stage_at(&self, k: usize) -> &PlanStage {
        self.stages.iter().rev().find(|s| s.from_round <= k).unwrap_or(&self.stages[0])
    }

    /// Games after 0, 1, ..., R rounds; every round is validated against the
    /// plan's cap and mode.
    pub fn prefix_games(&self, base: &Game) -> Result<Vec<Game>> {
        let mut games = Vec::with_capacity(self.rounds.len() + 1);
        games.push(base.clone());
        for (k, round) in self.rounds.iter().enumerate() {
            let current = games.last().expect("nonempty");
            validate_round(current, self.delta, self.mode, round).map_err(|v| Error::Replay { step: k, source: Box::new(Error::Round(v)) })?;
            let next = current.apply_transfers(round)?;
            games.push(next);
        }
        Ok(games)
    }

    pub fn terminal_game(&self, base: &Game) -> Result<Game> {
        Ok(self.prefix_games(base)?.pop().expect("nonempty"))
    }

    /// Recomputes checkpoint hashes and the terminal payoffs from `base`.
    pub fn seal(&mut self, base: &Game) -> Result<()> {
        let games = self.prefix_games(base)?;
        self.base_hash = base.content_hash();
        self.checkpoints = games.iter().enumerate().map(|(round, g)| Checkpoint { round, game_hash: g.content_hash() }).collect();
        let last = games.last().expect("nonempty");
        self.expected_terminal_payoffs = last.payoffs(&self.target.profile).to_vec();
        Ok(())
    }

    /// Appends `other`'s rounds and stages after this plan's.
    pub(crate) fn append(&mut self, other: ProtocolPlan) {
        let offset = self.rounds.len();
        self.rounds.extend(other.rounds);
        self.stages.extend(other.stages.into_iter().map(|mut s| {
            s.from_round += offset;
            s.to_round += offset;
            s
        }));
    }
}
