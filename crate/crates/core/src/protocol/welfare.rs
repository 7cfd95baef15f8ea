//! Implementing a payoff profile at a welfare-maximizing outcome: a transfer
//! stage that moves the outcome's payoffs to the requested profile while the
//! baseline stays an equilibrium, followed by a burn-only improvement plan.

use super::build_improvement_plan;
use super::plan::{CaseTag, PlanStage, ProtocolPlan};
use crate::commitment::{CommitmentRound, Mode, Pledge};
use crate::equilibria::is_pure_nash;
use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile, OutcomeTarget, TargetRole};
use crate::tol::EQ_TOL;

/// Who makes up a gaining player's expected-payoff change under the baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Compensation {
    /// Opponent whose alternative action carries the offsetting loss.
    pub opponent: usize,
    pub action: usize,
    /// Loss per unit of gain: `sigma_opp(outcome_opp) / sigma_opp(action)`.
    pub ratio: f64,
}

/// Linear path of games `base + lambda * direction` for `lambda` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WelfarePath {
    pub base: Game,
    pub outcome: Vec<usize>,
    pub payoffs: Vec<f64>,
    /// Payoff changes over the whole path, laid out like the game itself.
    pub direction: Game,
    pub compensation: Vec<Option<Compensation>>,
    /// True when the outcome lies outside the baseline's reach for every
    /// player, so only the outcome itself is touched.
    pub direct: bool,
}

impl WelfarePath {
    /// Path moving payoffs at `outcome` to `payoffs`. Players losing at the
    /// outcome lose the same amount everywhere; gaining players gain at every
    /// unilateral deviation from it and, when the baseline reaches the
    /// outcome, give back the expected gain at an alternative action of one
    /// opponent.
    pub fn new(game: &Game, sigma: &MixedProfile, outcome: &[usize], payoffs: &[f64]) -> Result<Self> {
        game.check_profile(outcome)?;
        sigma.check_shape(game)?;
        let n = game.num_players();
        if payoffs.len() != n {
            return Err(Error::Shape(format!("expected {n} payoffs, got {}", payoffs.len())));
        }
        let change: Vec<f64> = (0..n).map(|i| payoffs[i] - game.utility(i, outcome)).collect();
        let reach: Vec<f64> = (0..n).map(|i| sigma.weight_excluding(outcome, &[i])).collect();
        let direct = reach.iter().all(|&w| w == 0.0);
        let mut compensation = vec![None; n];
        if !direct {
            for i in 0..n {
                if change[i] <= 0.0 || reach[i] == 0.0 {
                    continue;
                }
                let found = (1..n).map(|k| (i + k) % n).find_map(|j| {
                    sigma.support(j).into_iter().find(|&c| c != outcome[j]).map(|c| Compensation {
                        opponent: j,
                        action: c,
                        ratio: sigma.prob(j, outcome[j]) / sigma.prob(j, c),
                    })
                });
                compensation[i] = Some(
                    found.ok_or_else(|| Error::Infeasible(format!("player {} gains at the outcome but every opponent plays it for sure", i + 1)))?,
                );
            }
        }
        let direction = Game::from_fn(game.action_counts().to_vec(), |a, i| {
            let d = change[i];
            if direct {
                return if a == outcome { d } else { 0.0 };
            }
            if d < 0.0 {
                return d;
            }
            if d == 0.0 {
                return 0.0;
            }
            let off: Vec<usize> = (0..n).filter(|&j| j != i && a[j] != outcome[j]).collect();
            match (off.as_slice(), compensation[i]) {
                ([], _) => d,
                ([j], Some(c)) if *j == c.opponent && a[*j] == c.action => -c.ratio * d,
                _ => 0.0,
            }
        })?;
        Ok(Self { base: game.clone(), outcome: outcome.to_vec(), payoffs: payoffs.to_vec(), direction, compensation, direct })
    }

    pub fn at(&self, lambda: f64) -> Game {
        Game::from_fn(self.base.action_counts().to_vec(), |a, i| self.base.utility(i, a) + lambda * self.direction.utility(i, a))
            .expect("same shape as the base game")
    }

    /// Rounds realizing the path with per-payer, per-outcome spending at most
    /// `delta`: at each outcome, losers fund gainers in proportion and burn
    /// the rest.
    pub fn rounds(&self, delta: f64) -> Vec<CommitmentRound> {
        let d = &self.direction;
        let n = d.num_players();
        let max = d.utilities().iter().map(|v| -v).fold(0.0, f64::max);
        if max <= 0.0 {
            return Vec::new();
        }
        let step = delta / max;
        let mut done = 0.0;
        let mut rounds = Vec::new();
        while done < 1.0 - 1e-12 {
            let h = step.min(1.0 - done);
            let mut pledges = Vec::new();
            for a in d.profiles() {
                let u = d.payoffs(&a);
                let neg: f64 = u.iter().filter(|v| **v < 0.0).map(|v| -v).sum();
                let pos: f64 = u.iter().filter(|v| **v > 0.0).sum();
                for p in (0..n).filter(|&p| u[p] < 0.0) {
                    let spend = -u[p] * h;
                    for g in (0..n).filter(|&g| u[g] > 0.0) {
                        pledges.push(Pledge::transfer(p, a.clone(), g, (spend * u[g] / neg).min(delta)));
                    }
                    let burn = spend * (1.0 - pos / neg);
                    if burn > 0.0 {
                        pledges.push(Pledge::burn(p, a.clone(), burn.min(delta)));
                    }
                }
            }
            rounds.push(CommitmentRound::new(pledges));
            done += h;
        }
        rounds
    }
}

/// Checks the welfare hypotheses: `payoffs` strictly improve every player's
/// baseline payoff and do not exceed the outcome's welfare.
pub fn check_welfare_target(game: &Game, sigma: &MixedProfile, outcome: &[usize], payoffs: &[f64]) -> Result<()> {
    let base = game.expected_utilities(sigma)?;
    if payoffs.len() != base.len() {
        return Err(Error::Shape(format!("expected {} payoffs, got {}", base.len(), payoffs.len())));
    }
    if let Some(i) = (0..base.len()).find(|&i| payoffs[i] <= base[i] + EQ_TOL) {
        return Err(Error::Hypothesis(format!("payoff {} for player {} does not improve on the baseline {}", payoffs[i], i + 1, base[i])));
    }
    let total: f64 = payoffs.iter().sum();
    let welfare = game.welfare_at(outcome);
    if total > welfare + EQ_TOL {
        return Err(Error::Infeasible(format!("requested payoffs sum to {total}, above the available welfare {welfare}")));
    }
    Ok(())
}

/// The transfer stage alone, targeting the lexicographically first
/// welfare-maximizing outcome.
pub fn build_welfare_transfer_stage(game: &Game, sigma: &MixedProfile, payoffs: &[f64], delta: f64) -> Result<ProtocolPlan> {
    if !(delta > 0.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let (_, outcome) = game.welfare_max();
    check_welfare_target(game, sigma, &outcome, payoffs)?;
    let path = WelfarePath::new(game, sigma, &outcome, payoffs)?;
    let rounds = path.rounds(delta);
    let base = game.expected_utilities(sigma)?;
    let lift = payoffs.iter().zip(&base).map(|(x, u)| x - u).fold(f64::NEG_INFINITY, f64::max);
    let stage = PlanStage {
        case: CaseTag::WelfareTransferStage,
        from_round: 0,
        to_round: rounds.len(),
        baseline: sigma.clone(),
        reference_support: sigma.supports(),
        ceiling: base.iter().map(|u| u + lift).collect(),
        pure_fallback: false,
        baseline_fixed: true,
        target_fixed: false,
        label: if path.direct { "transfers at the welfare-maximizing outcome".into() } else { "welfare transfer path".into() },
    };
    let mut plan = ProtocolPlan {
        case_tag: CaseTag::WelfareTransferStage,
        delta,
        mode: Mode::Transfers,
        base_hash: String::new(),
        permutation: game.action_counts().iter().map(|&c| (0..c).collect()).collect(),
        rounds,
        target: OutcomeTarget::new(game, outcome, TargetRole::WelfareMaximizer)?,
        baseline: sigma.clone(),
        stages: vec![stage],
        checkpoints: Vec::new(),
        expected_terminal_payoffs: Vec::new(),
    };
    plan.seal(game)?;
    Ok(plan)
}

/// Transfer stage followed by the improvement plan that makes the
/// welfare-maximizing outcome an equilibrium.
pub fn build_welfare_plan(game: &Game, sigma: &MixedProfile, payoffs: &[f64], delta: f64) -> Result<ProtocolPlan> {
    let mut plan = build_welfare_transfer_stage(game, sigma, payoffs, delta)?;
    let after = plan.terminal_game(game)?;
    let outcome = plan.target.profile.clone();
    if !is_pure_nash(&after, &outcome, 0.0) {
        let rest = build_improvement_plan(&after, sigma, &outcome, delta)?;
        plan.permutation = rest.permutation.clone();
        plan.append(rest);
    }
    plan.seal(game)?;
    Ok(plan)
}
