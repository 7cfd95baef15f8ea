//! Grid certification of plans: on-path properties at every checkpoint and
//! unilateral deviations (commitment, early stop, late continue, terminal
//! action) checked against the punishment response.
//!
//! The deviation space is continuous, so results are certified over a finite
//! grid of pledge amounts and a finite set of prefixes, never proven.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::commitment::{validate_round, CommitmentRound, Mode, Pledge, SessionState, Transcript, Vote};
use crate::equilibria::{
    build_characteristic_system, enumerate_pure_nash, find_punishment_equilibrium, find_punishment_or_pure, is_nash, is_pure_nash, solve_on_support,
    Punishment, SolveOutcome,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::game::{Game, MixedProfile};
use crate::protocol::{build_improvement_plan, build_welfare_plan, CaseTag, PlanStage, ProtocolPlan};
use crate::tol::{EQ_TOL, GAIN_TOL};

/// Constant in the round bound `C * n * U_range * max_i N_i / delta`.
pub const ROUND_CONSTANT: f64 = 64.0;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Pledge amounts as fractions of the cap.
    pub amounts: Vec<f64>,
    /// Maximum number of prefixes probed with commitment deviations
    /// (evenly spaced); `None` probes all of them.
    pub budget: Option<usize>,
    pub exec: Execution,
    pub round_constant: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { amounts: vec![0.5, 1.0], budget: None, exec: Execution::default(), round_constant: ROUND_CONSTANT }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub status: Status,
    pub detail: Option<String>,
    /// Replayable history reaching the failing checkpoint.
    pub witness: Option<Transcript>,
}

impl PropertyResult {
    fn na() -> Self {
        Self { status: Status::NotApplicable, detail: None, witness: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationClass {
    Commitment,
    EarlyStop,
    LateContinue,
    TerminalAction,
}

/// How the others' response after a deviation was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    /// Punishment within the stage ceiling.
    Punished,
    /// No punishment within the ceiling; the deviator's worst equilibrium
    /// among those found was used instead.
    WorstFound,
    /// No equilibrium found at all.
    Structural,
    /// No punishment needed (the deviation does not change play).
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationWitness {
    pub class: DeviationClass,
    /// Checkpoint (rounds completed) at which the deviation happens.
    pub checkpoint: usize,
    pub player: usize,
    pub description: String,
    pub deviator_payoff: f64,
    pub on_path_payoff: f64,
    pub gain: f64,
    pub response: Response,
    pub transcript: Option<Transcript>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassResult {
    pub class: DeviationClass,
    pub cases: usize,
    pub worst_gain: f64,
    /// Worst case found; present only when the class fails.
    pub witness: Option<DeviationWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub prefixes: Vec<usize>,
    pub classes: Vec<ClassResult>,
    pub structural_failures: usize,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundBound {
    pub rounds: usize,
    pub bound: f64,
    pub constant: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub amounts: Vec<f64>,
    pub budget: Option<usize>,
    pub certification: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnPathReport {
    pub checkpoints: usize,
    pub properties: BTreeMap<String, PropertyResult>,
    /// Punishment payoffs found at each checkpoint (when any).
    pub punishments: Vec<Option<Vec<f64>>>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub grid: GridSpec,
    pub properties: BTreeMap<String, PropertyResult>,
    pub deviation_results: DeviationReport,
    pub round_bound: RoundBound,
    pub accepted: bool,
}

fn check_hash(game: &Game, plan: &ProtocolPlan) -> Result<()> {
    let h = game.content_hash();
    if h != plan.base_hash {
        return Err(Error::Hypothesis(format!("plan was built for game {} but got game {}", plan.base_hash, h)));
    }
    Ok(())
}

/// Transcript following the plan for `k` rounds, then an optional deviating
/// round, then a stop and the given terminal actions.
fn transcript_for(
    game: &Game,
    plan: &ProtocolPlan,
    k: usize,
    extra: Option<&CommitmentRound>,
    votes: Vec<Vote>,
    terminal: &[usize],
) -> Result<Transcript> {
    let n = game.num_players();
    let mut s = SessionState::open(game.clone(), plan.delta, plan.mode)?;
    for r in &plan.rounds[..k] {
        s = s.submit_round(r.clone())?.cast_votes(vec![Vote::Continue; n])?;
    }
    if let Some(r) = extra {
        s = s.submit_round(r.clone())?;
    }
    Ok(s.cast_votes(votes)?.play_terminal(terminal.to_vec())?.into_transcript())
}

fn likeliest(profile: &MixedProfile) -> Vec<usize> {
    profile.probs().iter().map(|p| (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap_or(0)).collect()
}

fn punishment(game: &Game, stage: &PlanStage, seed: Option<&MixedProfile>) -> Result<Option<Punishment>> {
    let seed = seed.or(Some(&stage.baseline));
    if stage.pure_fallback {
        find_punishment_or_pure(game, &stage.reference_support, seed, &stage.ceiling)
    } else {
        find_punishment_equilibrium(game, &stage.reference_support, seed, &stage.ceiling)
    }
}

/// The others' response after a deviation by `player` in `game` and the
/// deviator's expected payoff under it.
fn respond(game: &Game, stage: &PlanStage, seed: Option<&MixedProfile>, player: usize) -> Result<(f64, Response, Option<MixedProfile>)> {
    if let Some(p) = punishment(game, stage, seed)? {
        return Ok((p.payoffs[player], Response::Punished, Some(p.profile)));
    }
    let mut found: Vec<MixedProfile> = Vec::new();
    if let SolveOutcome::Solved(p) = solve_on_support(game, &stage.reference_support, seed.or(Some(&stage.baseline)))? {
        if is_nash(game, &p, EQ_TOL)?.is_nash {
            found.push(p);
        }
    }
    found.extend(enumerate_pure_nash(game).iter().map(|a| MixedProfile::pure(game.action_counts(), a)));
    let mut best: Option<(f64, MixedProfile)> = None;
    for p in found {
        let u = game.expected_utility(&p, player)?;
        if best.as_ref().is_none_or(|(b, _)| u < *b) {
            best = Some((u, p));
        }
    }
    Ok(match best {
        Some((u, p)) => (u, Response::WorstFound, Some(p)),
        None => (f64::INFINITY, Response::Structural, None),
    })
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn stage_determinants(game: &Game, stage: &PlanStage) -> Result<Option<Vec<f64>>> {
    match stage.case {
        CaseTag::FullSupport2p => {
            let sys = build_characteristic_system(game, &stage.reference_support)?;
            Ok(Some(vec![sys.incentive_block(0)?.determinant(), sys.incentive_block(1)?.determinant()]))
        }
        CaseTag::FullSupportNp => {
            let sys = build_characteristic_system(game, &stage.reference_support)?;
            let x = sys.variables_of(&stage.baseline);
            Ok(Some(vec![sys.jacobian(&x).determinant()]))
        }
        _ => Ok(None),
    }
}

struct Recorder {
    props: BTreeMap<String, PropertyResult>,
}

impl Recorder {
    fn touch(&mut self, name: &str) {
        self.props.entry(name.into()).or_insert(PropertyResult { status: Status::Pass, detail: None, witness: None });
    }

    fn fail(&mut self, name: &str, detail: String, witness: Option<Transcript>) {
        let e = self.props.entry(name.into()).or_insert_with(PropertyResult::na);
        if e.status != Status::Fail {
            *e = PropertyResult { status: Status::Fail, detail: Some(detail), witness };
        }
    }

    fn check(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String, witness: impl FnOnce() -> Option<Transcript>) {
        if ok {
            self.touch(name);
        } else {
            self.fail(name, detail(), witness());
        }
    }
}

/// Property checks along the plan: the stage baseline is an equilibrium,
/// a punishment exists within the stage ceiling (and below the target
/// payoffs), monotonicity of payoffs and welfare, target preservation,
/// determinant invariance, and the target being an equilibrium at the end.
pub fn check_on_path(game: &Game, plan: &ProtocolPlan) -> Result<OnPathReport> {
    check_hash(game, plan)?;
    let games = plan.prefix_games(game)?;
    let target = &plan.target.profile;
    let n = game.num_players();
    let mut rec = Recorder { props: BTreeMap::new() };
    let prefix_witness = |k: usize| transcript_for(game, plan, k, None, vec![Vote::Stop; n], target).ok();
    let mut punishments = Vec::with_capacity(games.len());
    let mut stage_dets: Option<(usize, Vec<f64>)> = None;

    for (k, h) in games.iter().enumerate() {
        let st = plan.stage_at(k);
        let si = plan.stages.iter().position(|s| std::ptr::eq(s, st)).unwrap_or(0);
        if st.baseline_fixed {
            let check = is_nash(h, &st.baseline, EQ_TOL)?;
            rec.check(
                "baseline_equilibrium",
                check.is_nash,
                || format!("checkpoint {k}: baseline not an equilibrium ({:?})", check.worst),
                || prefix_witness(k),
            );
        }
        let p = punishment(h, st, None)?;
        rec.check(
            "punishment_within_ceiling",
            p.is_some(),
            || format!("checkpoint {k}: no punishment within ceiling {:?}", st.ceiling),
            || prefix_witness(k),
        );
        let below = match &p {
            Some(p) => p.payoffs.iter().zip(&plan.expected_terminal_payoffs).all(|(u, c)| *u <= c + EQ_TOL),
            None => find_punishment_or_pure(h, &st.reference_support, Some(&st.baseline), &plan.expected_terminal_payoffs)?.is_some(),
        };
        rec.check(
            "punishment_below_target",
            below,
            || format!("checkpoint {k}: no equilibrium pays everyone at most the target payoffs"),
            || prefix_witness(k),
        );
        punishments.push(p.map(|p| p.payoffs));

        if st.target_fixed {
            let same = h.payoffs(target).iter().zip(game.payoffs(target)).all(|(a, b)| (a - b).abs() <= 1e-12);
            rec.check(
                "target_payoffs_fixed",
                same,
                || format!("checkpoint {k}: target payoffs moved to {:?}", h.payoffs(target)),
                || prefix_witness(k),
            );
        }

        if let Some(d) = stage_determinants(h, st)? {
            match &stage_dets {
                Some((s, d0)) if *s == si => {
                    let drift = d.iter().zip(d0).map(|(a, b)| rel_diff(*a, *b)).fold(0.0, f64::max);
                    rec.check(
                        "determinant_invariant",
                        drift <= 1e-7,
                        || format!("checkpoint {k}: determinant drift {drift:.3e}"),
                        || prefix_witness(k),
                    );
                }
                _ => {
                    rec.touch("determinant_invariant");
                    stage_dets = Some((si, d));
                }
            }
        }

        if k > 0 {
            let prev = &games[k - 1];
            let round_stage = plan.stage_at(k - 1);
            let welfare_ok = prev.profiles().all(|a| h.welfare_at(&a) <= prev.welfare_at(&a) + 1e-12);
            rec.check("welfare_nonincreasing", welfare_ok, || format!("round {}: welfare increased at some outcome", k - 1), || prefix_witness(k));
            if round_stage.case != CaseTag::WelfareTransferStage {
                let burn_ok = h.utilities().iter().zip(prev.utilities()).all(|(a, b)| *a <= b + 1e-12);
                rec.check("utilities_nonincreasing", burn_ok, || format!("round {}: some payoff increased", k - 1), || prefix_witness(k));
            }
            if round_stage.baseline_fixed {
                let before = prev.expected_utilities(&round_stage.baseline)?;
                let after = h.expected_utilities(&round_stage.baseline)?;
                let ok = after.iter().zip(&before).all(|(a, b)| *a <= b + EQ_TOL);
                rec.check(
                    "baseline_payoffs_nonincreasing",
                    ok,
                    || format!("round {}: baseline payoffs rose from {before:?} to {after:?}", k - 1),
                    || prefix_witness(k),
                );
            }
        }
    }

    let last = games.last().expect("nonempty");
    rec.check(
        "target_equilibrium",
        is_pure_nash(last, target, EQ_TOL),
        || "terminal game: target is not an equilibrium".into(),
        || prefix_witness(plan.num_rounds()),
    );
    let paid = last.payoffs(target);
    let ok = paid.iter().zip(&plan.expected_terminal_payoffs).all(|(a, b)| (a - b).abs() <= 1e-9);
    rec.check(
        "terminal_payoffs",
        ok,
        || format!("terminal payoffs {paid:?} differ from the plan's {:?}", plan.expected_terminal_payoffs),
        || prefix_witness(plan.num_rounds()),
    );
    let hashes_ok = plan.checkpoints.len() == games.len() && plan.checkpoints.iter().zip(&games).all(|(c, g)| c.game_hash == g.content_hash());
    rec.check("checkpoint_hashes", hashes_ok, || "checkpoint hashes do not match the replay".into(), || None);
    for name in [
        "determinant_invariant",
        "utilities_nonincreasing",
        "baseline_payoffs_nonincreasing",
        "welfare_nonincreasing",
        "target_payoffs_fixed",
        "baseline_equilibrium",
    ] {
        rec.props.entry(name.into()).or_insert_with(PropertyResult::na);
    }
    let passed = rec.props.values().all(|p| p.status != Status::Fail);
    Ok(OnPathReport { checkpoints: games.len(), properties: rec.props, punishments, passed })
}

/// Deviating pledge sets for `player`: withholding, a burn at each outcome,
/// a burn on every unilateral alternative of each outcome, a payment to each
/// other player at each outcome (transfers only), all at each of `amounts`
/// (fractions of the cap), plus the pattern "burn the full cap at one
/// outcome while paying the full cap to an opponent at another" (transfers
/// only).
pub fn commitment_grid(game: &Game, player: usize, delta: f64, mode: Mode, amounts: &[f64]) -> Vec<Vec<Pledge>> {
    let n = game.num_players();
    let counts = game.action_counts();
    let profiles: Vec<Vec<usize>> = game.profiles().collect();
    let mut out = vec![Vec::new()];
    for a in &profiles {
        for &f in amounts {
            let x = f * delta;
            out.push(vec![Pledge::burn(player, a.clone(), x)]);
            out.push(
                (0..counts[player])
                    .filter(|&b| b != a[player])
                    .map(|b| {
                        let mut o = a.clone();
                        o[player] = b;
                        Pledge::burn(player, o, x)
                    })
                    .collect(),
            );
            if mode == Mode::Transfers {
                for r in (0..n).filter(|&r| r != player) {
                    out.push(vec![Pledge::transfer(player, a.clone(), r, x)]);
                }
            }
        }
    }
    if mode == Mode::Transfers {
        for burn_at in &profiles {
            for pay_at in profiles.iter().filter(|b| *b != burn_at) {
                for r in (0..n).filter(|&r| r != player) {
                    out.push(vec![Pledge::burn(player, burn_at.clone(), delta), Pledge::transfer(player, pay_at.clone(), r, delta)]);
                }
            }
        }
    }
    out.dedup();
    out
}

fn describe(pledges: &[Pledge]) -> String {
    if pledges.is_empty() {
        return "withhold all pledges".into();
    }
    pledges
        .iter()
        .map(|p| {
            let o: Vec<usize> = p.outcome.iter().map(|a| a + 1).collect();
            match p.recipient {
                crate::commitment::Recipient::Burn => format!("burn {} at {:?}", p.amount, o),
                crate::commitment::Recipient::Player(r) => format!("pay {} to player {} at {:?}", p.amount, r + 1, o),
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Evenly spaced selection of `budget` values from `0..len`.
fn spaced(len: usize, budget: Option<usize>) -> Vec<usize> {
    match budget {
        Some(b) if b < len => {
            if b == 0 {
                return Vec::new();
            }
            if b == 1 {
                return vec![0];
            }
            let mut v: Vec<usize> = (0..b).map(|j| j * (len - 1) / (b - 1)).collect();
            v.dedup();
            v
        }
        _ => (0..len).collect(),
    }
}

struct Case {
    class: DeviationClass,
    checkpoint: usize,
    player: usize,
    description: String,
    payoff: f64,
    response: Response,
    round: Option<CommitmentRound>,
    profile: Option<MixedProfile>,
}

/// Unilateral deviations against the plan's strategy bundle: on-path players
/// follow the rounds, vote to continue until the plan ends and then play the
/// target; after any observed deviation they vote to stop and play the
/// punishment for the current game.
pub fn check_deviations(game: &Game, plan: &ProtocolPlan, opts: &VerifyOptions) -> Result<DeviationReport> {
    check_hash(game, plan)?;
    let games = plan.prefix_games(game)?;
    let n = game.num_players();
    let r = plan.num_rounds();
    let expected = &plan.expected_terminal_payoffs;
    let prefixes = spaced(r, opts.budget);

    let per_prefix: Vec<Result<Vec<Case>>> = opts.exec.map(prefixes.len(), |idx| {
        let k = prefixes[idx];
        let h = &games[k];
        let st = plan.stage_at(k);
        let seed = punishment(h, st, None)?.map(|p| p.profile);
        let mut cases = Vec::new();
        for player in 0..n {
            for pledges in commitment_grid(h, player, plan.delta, plan.mode, &opts.amounts) {
                let round = plan.rounds[k].with_player_replaced(player, &pledges);
                if round == plan.rounds[k] || validate_round(h, plan.delta, plan.mode, &round).is_err() {
                    continue;
                }
                let next = h.apply_transfers(&round)?;
                let (payoff, response, profile) = respond(&next, st, seed.as_ref(), player)?;
                cases.push(Case {
                    class: DeviationClass::Commitment,
                    checkpoint: k,
                    player,
                    description: describe(&pledges),
                    payoff,
                    response,
                    round: Some(round),
                    profile,
                });
            }
        }
        Ok(cases)
    });

    let mut cases = Vec::new();
    for c in per_prefix {
        cases.extend(c?);
    }
    // early stops at every checkpoint before the end
    let stops: Vec<Result<Vec<Case>>> = opts.exec.map(r, |k| {
        let st = plan.stage_at(k);
        (0..n)
            .map(|player| {
                let (payoff, response, profile) = respond(&games[k], st, None, player)?;
                Ok(Case {
                    class: DeviationClass::EarlyStop,
                    checkpoint: k,
                    player,
                    description: format!("vote to stop after {k} rounds"),
                    payoff,
                    response,
                    round: None,
                    profile,
                })
            })
            .collect()
    });
    for c in stops {
        cases.extend(c?);
    }
    let last = games.last().expect("nonempty");
    let target = &plan.target.profile;
    for player in 0..n {
        // any single stop vote ends the phase, so continuing changes nothing
        cases.push(Case {
            class: DeviationClass::LateContinue,
            checkpoint: r,
            player,
            description: "vote to continue after the last round".into(),
            payoff: expected[player],
            response: Response::None,
            round: None,
            profile: None,
        });
        for a in (0..game.action_counts()[player]).filter(|&a| a != target[player]) {
            let mut dev = target.clone();
            dev[player] = a;
            cases.push(Case {
                class: DeviationClass::TerminalAction,
                checkpoint: r,
                player,
                description: format!("play action {} instead of {}", a + 1, target[player] + 1),
                payoff: last.utility(player, &dev),
                response: Response::None,
                round: None,
                profile: Some(MixedProfile::pure(game.action_counts(), &dev)),
            });
        }
    }

    let mut classes = Vec::new();
    let mut structural = 0;
    for class in [DeviationClass::Commitment, DeviationClass::EarlyStop, DeviationClass::LateContinue, DeviationClass::TerminalAction] {
        let mut worst: Option<&Case> = None;
        let mut count = 0;
        for c in cases.iter().filter(|c| c.class == class) {
            count += 1;
            if c.response == Response::Structural {
                structural += 1;
            }
            let gain = c.payoff - expected[c.player];
            if worst.is_none_or(|w| gain > w.payoff - expected[w.player]) {
                worst = Some(c);
            }
        }
        let worst_gain = worst.map(|w| w.payoff - expected[w.player]).unwrap_or(f64::NEG_INFINITY);
        let witness = match worst {
            Some(w) if worst_gain > GAIN_TOL => Some(witness_for(game, plan, w, expected[w.player])?),
            _ => None,
        };
        classes.push(ClassResult { class, cases: count, worst_gain, witness });
    }
    let accepted = classes.iter().all(|c| c.worst_gain <= GAIN_TOL);
    Ok(DeviationReport { prefixes, classes, structural_failures: structural, accepted })
}

fn witness_for(game: &Game, plan: &ProtocolPlan, c: &Case, on_path: f64) -> Result<DeviationWitness> {
    let n = game.num_players();
    let transcript = match c.class {
        DeviationClass::Commitment | DeviationClass::EarlyStop => {
            let terminal = c.profile.as_ref().map(likeliest).unwrap_or_else(|| plan.target.profile.clone());
            let mut votes = vec![Vote::Stop; n];
            if c.class == DeviationClass::Commitment {
                votes[c.player] = Vote::Continue;
            }
            transcript_for(game, plan, c.checkpoint, c.round.as_ref(), votes, &terminal).ok()
        }
        DeviationClass::TerminalAction => {
            let terminal = c.profile.as_ref().and_then(MixedProfile::as_pure).expect("pure deviation");
            transcript_for(game, plan, plan.num_rounds(), None, vec![Vote::Stop; n], &terminal).ok()
        }
        DeviationClass::LateContinue => None,
    };
    Ok(DeviationWitness {
        class: c.class,
        checkpoint: c.checkpoint,
        player: c.player,
        description: c.description.clone(),
        deviator_payoff: c.payoff,
        on_path_payoff: on_path,
        gain: c.payoff - on_path,
        response: c.response,
        transcript,
    })
}

/// `|rounds| <= C * n * U_range * max_i N_i / delta` on the base game.
pub fn round_bound_check(game: &Game, plan: &ProtocolPlan, constant: f64) -> RoundBound {
    let n = game.num_players() as f64;
    let max_n = game.action_counts().iter().copied().max().unwrap_or(1) as f64;
    let bound = constant * n * game.utility_range() * max_n / plan.delta;
    RoundBound { rounds: plan.num_rounds(), bound, constant, passed: plan.num_rounds() as f64 <= bound || plan.num_rounds() == 0 }
}

/// On-path properties, deviations and the round bound together.
pub fn verify_plan(game: &Game, plan: &ProtocolPlan, opts: &VerifyOptions) -> Result<VerificationReport> {
    let on_path = check_on_path(game, plan)?;
    let deviations = check_deviations(game, plan, opts)?;
    let round_bound = round_bound_check(game, plan, opts.round_constant);
    let accepted = on_path.passed && deviations.accepted && round_bound.passed;
    Ok(VerificationReport {
        grid: GridSpec { amounts: opts.amounts.clone(), budget: opts.budget, certification: "grid-certified".into() },
        properties: on_path.properties,
        deviation_results: deviations,
        round_bound,
        accepted,
    })
}

/// What a plan should achieve.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanRequest {
    /// Make `target` an equilibrium (burning only).
    Improve { sigma: MixedProfile, target: Vec<usize> },
    /// Pay `payoffs` at the welfare-maximizing outcome and make it an
    /// equilibrium (transfers).
    Welfare { sigma: MixedProfile, payoffs: Vec<f64> },
}

impl PlanRequest {
    pub fn build(&self, game: &Game, delta: f64) -> Result<ProtocolPlan> {
        match self {
            PlanRequest::Improve { sigma, target } => build_improvement_plan(game, sigma, target, delta),
            PlanRequest::Welfare { sigma, payoffs } => build_welfare_plan(game, sigma, payoffs, delta),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaChoice {
    pub delta: f64,
    pub rounds: usize,
    pub plan: ProtocolPlan,
    pub report: VerificationReport,
    /// Every cap tried, largest first, with whether it passed.
    pub tried: Vec<(f64, bool)>,
}

pub const DELTA_FLOOR: f64 = 1e-6;

/// Builds and verifies the plan at one cap.
pub fn check_delta(game: &Game, request: &PlanRequest, delta: f64, opts: &VerifyOptions) -> Result<(ProtocolPlan, VerificationReport)> {
    let plan = request.build(game, delta)?;
    let report = verify_plan(game, &plan, opts)?;
    Ok((plan, report))
}

/// Halves the cap from 1% of the utility range until the plan verifies.
pub fn choose_delta(game: &Game, request: &PlanRequest, opts: &VerifyOptions) -> Result<DeltaChoice> {
    let range = game.utility_range();
    if !(range > 0.0) {
        return Err(Error::Infeasible("constant game: no cap scale".into()));
    }
    let mut delta = 0.01 * range;
    let mut tried = Vec::new();
    while delta >= DELTA_FLOOR {
        match check_delta(game, request, delta, opts) {
            Ok((plan, report)) => {
                tried.push((delta, report.accepted));
                if report.accepted {
                    return Ok(DeltaChoice { delta, rounds: plan.num_rounds(), plan, report, tried });
                }
            }
            Err(Error::InvalidDelta(_)) => tried.push((delta, false)),
            Err(e) => return Err(e),
        }
        delta /= 2.0;
    }
    Err(Error::Infeasible(format!("no cap down to {DELTA_FLOOR} produced a verified plan (tried {})", tried.len())))
}
