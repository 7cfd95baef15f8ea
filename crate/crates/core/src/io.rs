//! JSON file formats. Players, actions and outcomes are 1-based on disk and
//! 0-based in memory; floats use shortest round-trip decimal form, so games
//! survive a write/read cycle bit for bit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::commitment::{CommitmentRound, Mode, Pledge, Recipient, Transcript, Vote};
use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile, OutcomeTarget, TargetRole};
use crate::protocol::{CaseTag, Checkpoint, PlanStage, ProtocolPlan};
use crate::verify::{ClassResult, DeviationClass, DeviationWitness, PropertyResult, Response, RoundBound, Status, VerificationReport};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance block embedded in every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub schema_version: u32,
    pub tool_version: String,
    /// Content hashes of the inputs, by role ("game", "plan", ...).
    pub inputs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
}

impl Meta {
    pub fn new(inputs: &[(&str, String)], rng_seed: Option<u64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.into(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            rng_seed,
        }
    }
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|a| a + 1).collect()
}

fn zero_based(v: &[usize], what: &str) -> Result<Vec<usize>> {
    v.iter().map(|&a| a.checked_sub(1).ok_or_else(|| Error::Parse(format!("{what}: indices are 1-based, got 0")))).collect()
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

fn render<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameFile {
    pub players: usize,
    /// Action counts; may be omitted when `action_names` is present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_names: Option<Vec<Vec<String>>>,
    /// `payoffs[profile][player]`, profiles in lexicographic order.
    pub payoffs: Vec<Vec<f64>>,
}

impl GameFile {
    pub fn from_game(game: &Game) -> Self {
        Self {
            players: game.num_players(),
            actions: Some(game.action_counts().to_vec()),
            action_names: game.action_names().map(<[_]>::to_vec),
            payoffs: game.utilities().chunks(game.num_players()).map(<[f64]>::to_vec).collect(),
        }
    }

    pub fn to_game(&self) -> Result<Game> {
        let counts = match (&self.actions, &self.action_names) {
            (Some(c), _) => c.clone(),
            (None, Some(names)) => names.iter().map(Vec::len).collect(),
            (None, None) => return Err(Error::Parse("game needs `actions` or `action_names`".into())),
        };
        if counts.len() != self.players {
            return Err(Error::Shape(format!("{} players but {} action counts", self.players, counts.len())));
        }
        if let Some(bad) = self.payoffs.iter().position(|row| row.len() != self.players) {
            return Err(Error::Shape(format!("payoff row {} has {} entries, expected {}", bad + 1, self.payoffs[bad].len(), self.players)));
        }
        let game = Game::new(counts, self.payoffs.concat())?;
        match &self.action_names {
            Some(names) => game.with_action_names(names.clone()),
            None => Ok(game),
        }
    }
}

pub fn read_game(text: &str) -> Result<Game> {
    parse::<GameFile>(text)?.to_game()
}

pub fn write_game(game: &Game) -> String {
    render(&GameFile::from_game(game))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum SinkTag {
    #[serde(rename = "BURN")]
    Burn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum RecipientDto {
    Player(usize),
    Sink(SinkTag),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PledgeDto {
    payer: usize,
    outcome: Vec<usize>,
    recipient: RecipientDto,
    amount: f64,
}

impl PledgeDto {
    fn from_pledge(p: &Pledge) -> Self {
        Self {
            payer: p.payer + 1,
            outcome: one_based(&p.outcome),
            recipient: match p.recipient {
                Recipient::Burn => RecipientDto::Sink(SinkTag::Burn),
                Recipient::Player(r) => RecipientDto::Player(r + 1),
            },
            amount: p.amount,
        }
    }

    fn to_pledge(&self) -> Result<Pledge> {
        let payer = zero_based(&[self.payer], "payer")?[0];
        let outcome = zero_based(&self.outcome, "outcome")?;
        Ok(match self.recipient {
            RecipientDto::Sink(_) => Pledge::burn(payer, outcome, self.amount),
            RecipientDto::Player(r) => Pledge::transfer(payer, outcome, zero_based(&[r], "recipient")?[0], self.amount),
        })
    }
}

fn rounds_out(rounds: &[CommitmentRound]) -> Vec<Vec<PledgeDto>> {
    rounds.iter().map(|r| r.pledges.iter().map(PledgeDto::from_pledge).collect()).collect()
}

fn rounds_in(rounds: &[Vec<PledgeDto>]) -> Result<Vec<CommitmentRound>> {
    rounds.iter().map(|r| Ok(CommitmentRound::new(r.iter().map(PledgeDto::to_pledge).collect::<Result<_>>()?))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptFile {
    pub meta: Meta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<GameFile>,
    pub delta: f64,
    pub mode: Mode,
    rounds: Vec<Vec<PledgeDto>>,
    pub votes: Vec<Vec<Vote>>,
    pub terminal_actions: Option<Vec<usize>>,
    pub final_payoffs: Option<Vec<f64>>,
}

impl TranscriptFile {
    pub fn new(t: &Transcript, game: &Game, inline_game: bool, rng_seed: Option<u64>) -> Self {
        Self {
            meta: Meta::new(&[("game", game.content_hash())], rng_seed),
            game: inline_game.then(|| GameFile::from_game(game)),
            delta: t.delta,
            mode: t.mode,
            rounds: rounds_out(&t.rounds),
            votes: t.votes.clone(),
            terminal_actions: t.terminal_actions.as_deref().map(one_based),
            final_payoffs: t.final_payoffs.clone(),
        }
    }

    pub fn to_transcript(&self) -> Result<Transcript> {
        Ok(Transcript {
            delta: self.delta,
            mode: self.mode,
            rounds: rounds_in(&self.rounds)?,
            votes: self.votes.clone(),
            terminal_actions: self.terminal_actions.as_deref().map(|a| zero_based(a, "terminal_actions")).transpose()?,
            final_payoffs: self.final_payoffs.clone(),
        })
    }
}

pub fn write_transcript(t: &Transcript, game: &Game, inline_game: bool, rng_seed: Option<u64>) -> String {
    render(&TranscriptFile::new(t, game, inline_game, rng_seed))
}

pub fn read_transcript(text: &str) -> Result<TranscriptFile> {
    parse(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StageDto {
    case: CaseTag,
    first_round: usize,
    last_round: usize,
    baseline: Vec<Vec<f64>>,
    reference_support: Vec<Vec<usize>>,
    ceiling: Vec<f64>,
    pure_fallback: bool,
    baseline_fixed: bool,
    target_fixed: bool,
    label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub meta: Meta,
    pub case_tag: CaseTag,
    pub delta: f64,
    pub mode: Mode,
    pub game_hash: String,
    permutation: Vec<Vec<usize>>,
    target: Vec<usize>,
    target_role: TargetRole,
    baseline: Vec<Vec<f64>>,
    punishment_spec: Vec<StageDto>,
    rounds: Vec<Vec<PledgeDto>>,
    checkpoints: Vec<Checkpoint>,
    pub expected_terminal_payoffs: Vec<f64>,
}

impl PlanFile {
    pub fn new(plan: &ProtocolPlan) -> Self {
        Self {
            meta: Meta::new(&[("game", plan.base_hash.clone())], None),
            case_tag: plan.case_tag,
            delta: plan.delta,
            mode: plan.mode,
            game_hash: plan.base_hash.clone(),
            permutation: plan.permutation.iter().map(|p| one_based(p)).collect(),
            target: one_based(&plan.target.profile),
            target_role: plan.target.role,
            baseline: plan.baseline.probs().to_vec(),
            punishment_spec: plan
                .stages
                .iter()
                .map(|s| StageDto {
                    case: s.case,
                    // 1-based, inclusive; empty stages have last < first
                    first_round: s.from_round + 1,
                    last_round: s.to_round,
                    baseline: s.baseline.probs().to_vec(),
                    reference_support: s.reference_support.iter().map(|v| one_based(v)).collect(),
                    ceiling: s.ceiling.clone(),
                    pure_fallback: s.pure_fallback,
                    baseline_fixed: s.baseline_fixed,
                    target_fixed: s.target_fixed,
                    label: s.label.clone(),
                })
                .collect(),
            rounds: rounds_out(&plan.rounds),
            checkpoints: plan.checkpoints.clone(),
            expected_terminal_payoffs: plan.expected_terminal_payoffs.clone(),
        }
    }

    pub fn to_plan(&self) -> Result<ProtocolPlan> {
        let stages = self
            .punishment_spec
            .iter()
            .map(|s| {
                Ok(PlanStage {
                    case: s.case,
                    from_round: s.first_round.checked_sub(1).ok_or_else(|| Error::Parse("first_round is 1-based".into()))?,
                    to_round: s.last_round,
                    baseline: MixedProfile::new(s.baseline.clone())?,
                    reference_support: s.reference_support.iter().map(|v| zero_based(v, "reference_support")).collect::<Result<_>>()?,
                    ceiling: s.ceiling.clone(),
                    pure_fallback: s.pure_fallback,
                    baseline_fixed: s.baseline_fixed,
                    target_fixed: s.target_fixed,
                    label: s.label.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if stages.is_empty() {
            return Err(Error::Parse("plan has no punishment_spec stages".into()));
        }
        Ok(ProtocolPlan {
            case_tag: self.case_tag,
            delta: self.delta,
            mode: self.mode,
            base_hash: self.game_hash.clone(),
            permutation: self.permutation.iter().map(|p| zero_based(p, "permutation")).collect::<Result<_>>()?,
            rounds: rounds_in(&self.rounds)?,
            target: OutcomeTarget { profile: zero_based(&self.target, "target")?, role: self.target_role },
            baseline: MixedProfile::new(self.baseline.clone())?,
            stages,
            checkpoints: self.checkpoints.clone(),
            expected_terminal_payoffs: self.expected_terminal_payoffs.clone(),
        })
    }
}

pub fn write_plan(plan: &ProtocolPlan) -> String {
    render(&PlanFile::new(plan))
}

pub fn read_plan(text: &str) -> Result<ProtocolPlan> {
    parse::<PlanFile>(text)?.to_plan()
}

/// Hash of a plan's on-disk form, for provenance blocks.
pub fn plan_hash(plan: &ProtocolPlan) -> String {
    use sha2::{Digest, Sha256};
    let text = serde_json::to_string(&PlanFile::new(plan)).expect("plain data serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PropertyDto {
    status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    witness: Option<TranscriptFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct WitnessDto {
    checkpoint: usize,
    player: usize,
    description: String,
    deviator_payoff: f64,
    on_path_payoff: f64,
    gain: f64,
    response: Response,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    transcript: Option<TranscriptFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ClassDto {
    class: DeviationClass,
    cases: usize,
    /// `null` when the class had no cases; `f64::MAX` when no equilibrium
    /// answered some deviation.
    worst_gain: Option<f64>,
    passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub meta: Meta,
    certification: String,
    grid_amounts: Vec<f64>,
    budget: Option<usize>,
    prefixes_checked: Vec<usize>,
    properties: BTreeMap<String, PropertyDto>,
    deviation_classes: Vec<ClassDto>,
    structural_failures: usize,
    round_bound: RoundBound,
    pub accepted: bool,
}

impl ReportFile {
    pub fn new(report: &VerificationReport, game: &Game, plan: &ProtocolPlan) -> Self {
        let transcript = |t: &Transcript| TranscriptFile::new(t, game, false, None);
        let witness = |w: &DeviationWitness| WitnessDto {
            checkpoint: w.checkpoint,
            player: w.player + 1,
            description: w.description.clone(),
            deviator_payoff: w.deviator_payoff,
            on_path_payoff: w.on_path_payoff,
            gain: w.gain,
            response: w.response,
            transcript: w.transcript.as_ref().map(transcript),
        };
        let class = |c: &ClassResult| ClassDto {
            class: c.class,
            cases: c.cases,
            // an unresolved response counts as unbounded gain
            worst_gain: (c.cases > 0).then(|| c.worst_gain.min(f64::MAX)),
            passed: c.worst_gain <= crate::tol::GAIN_TOL,
            witness: c.witness.as_ref().map(witness),
        };
        let property = |p: &PropertyResult| PropertyDto { status: p.status, detail: p.detail.clone(), witness: p.witness.as_ref().map(transcript) };
        Self {
            meta: Meta::new(&[("game", game.content_hash()), ("plan", plan_hash(plan))], None),
            certification: report.grid.certification.clone(),
            grid_amounts: report.grid.amounts.clone(),
            budget: report.grid.budget,
            prefixes_checked: report.deviation_results.prefixes.clone(),
            properties: report.properties.iter().map(|(k, v)| (k.clone(), property(v))).collect(),
            deviation_classes: report.deviation_results.classes.iter().map(class).collect(),
            structural_failures: report.deviation_results.structural_failures,
            round_bound: report.round_bound.clone(),
            accepted: report.accepted,
        }
    }

    /// Witness transcripts of failing classes and properties, by label.
    pub fn witnesses(&self) -> Vec<(String, &TranscriptFile)> {
        let mut out = Vec::new();
        for c in &self.deviation_classes {
            if let Some(t) = c.witness.as_ref().and_then(|w| w.transcript.as_ref()) {
                out.push((format!("{:?}", c.class).to_lowercase(), t));
            }
        }
        for (k, p) in &self.properties {
            if let Some(t) = &p.witness {
                out.push((k.clone(), t));
            }
        }
        out
    }
}

pub fn write_report(report: &VerificationReport, game: &Game, plan: &ProtocolPlan) -> String {
    render(&ReportFile::new(report, game, plan))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    render(value)
}
