//! Punishment equilibria and the empirical strong-punishability probe.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::nash::{enumerate_pure_nash, is_nash};
use super::solve::{is_non_degenerate, solve_on_support, SolveOutcome};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::game::{Game, MixedProfile};
use crate::tol::EQ_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PunishmentSource {
    /// Equilibrium with the reference support.
    SameSupport,
    /// A pure equilibrium found after the same-support solve failed.
    PureFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Punishment {
    pub profile: MixedProfile,
    pub payoffs: Vec<f64>,
    pub source: PunishmentSource,
}

fn within(payoffs: &[f64], ceiling: &[f64]) -> bool {
    payoffs.iter().zip(ceiling).all(|(u, c)| *u <= c + EQ_TOL)
}

/// Equilibrium of `game` with support `reference_support` whose payoffs stay
/// at or below `ceiling` (per player, up to 1e-9).
pub fn find_punishment_equilibrium(
    game: &Game,
    reference_support: &[Vec<usize>],
    seed: Option<&MixedProfile>,
    ceiling: &[f64],
) -> Result<Option<Punishment>> {
    let SolveOutcome::Solved(profile) = solve_on_support(game, reference_support, seed)? else {
        return Ok(None);
    };
    if !is_nash(game, &profile, EQ_TOL)?.is_nash {
        return Ok(None);
    }
    let payoffs = game.expected_utilities(&profile)?;
    Ok(within(&payoffs, ceiling).then_some(Punishment { profile, payoffs, source: PunishmentSource::SameSupport }))
}

/// Like [`find_punishment_equilibrium`], but falls back to the first pure
/// equilibrium (lexicographically) within the ceiling.
pub fn find_punishment_or_pure(
    game: &Game,
    reference_support: &[Vec<usize>],
    seed: Option<&MixedProfile>,
    ceiling: &[f64],
) -> Result<Option<Punishment>> {
    if let Some(p) = find_punishment_equilibrium(game, reference_support, seed, ceiling)? {
        return Ok(Some(p));
    }
    Ok(enumerate_pure_nash(game).into_iter().find(|a| within(game.payoffs(a), ceiling)).map(|a| Punishment {
        payoffs: game.payoffs(&a).to_vec(),
        profile: MixedProfile::pure(game.action_counts(), &a),
        source: PunishmentSource::PureFallback,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeFailure {
    pub sample: usize,
    /// Flat payoff table of the perturbed game.
    pub perturbed_utilities: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PunishabilityReport {
    pub epsilon: f64,
    pub delta: f64,
    pub samples: usize,
    pub rng_seed: u64,
    pub failures: Vec<ProbeFailure>,
    /// Largest `max_i (u'_i(sigma') - u_i(sigma))` over samples where a
    /// same-support equilibrium was found.
    pub worst_excess: f64,
}

impl PunishabilityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

enum SampleResult {
    Found { excess: f64 },
    Failed { reason: String, excess: Option<f64> },
}

fn evaluate_sample(perturbed: &Game, profile: &MixedProfile, base_payoffs: &[f64], epsilon: f64) -> Result<SampleResult> {
    let supports = profile.supports();
    let found = match solve_on_support(perturbed, &supports, Some(profile))? {
        SolveOutcome::Solved(p) => p,
        other => return Ok(SampleResult::Failed { reason: format!("no same-support equilibrium: {other:?}"), excess: None }),
    };
    if let Some(w) = is_nash(perturbed, &found, EQ_TOL)?.worst {
        return Ok(SampleResult::Failed {
            reason: format!("same-support solution is not an equilibrium (player {} gains {})", w.player + 1, w.gain),
            excess: None,
        });
    }
    let payoffs = perturbed.expected_utilities(&found)?;
    let excess = payoffs.iter().zip(base_payoffs).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
    if excess > epsilon + EQ_TOL {
        return Ok(SampleResult::Failed { reason: format!("punishment exceeds the ceiling by {}", excess - epsilon), excess: Some(excess) });
    }
    Ok(SampleResult::Found { excess })
}

/// Per-sample deterministic perturbation: independent uniform noise in
/// `[-delta, delta]` on every payoff entry.
pub fn sample_perturbation(game: &Game, delta: f64, rng_seed: u64, sample: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(sample as u64);
    (0..game.utilities().len()).map(|_| if delta > 0.0 { rng.random_range(-delta..=delta) } else { 0.0 }).collect()
}

/// Samples games within distance `delta` of `game` and checks that each has
/// an equilibrium with the support of `profile` paying no player more than
/// `epsilon` above `profile`'s payoffs.
pub fn probe_strong_punishability(
    game: &Game,
    profile: &MixedProfile,
    epsilon: f64,
    delta: f64,
    samples: usize,
    rng_seed: u64,
    exec: Execution,
) -> Result<PunishabilityReport> {
    let rep = is_non_degenerate(game, profile)?;
    if !rep.non_degenerate {
        return Err(Error::Degenerate(format!("det {} (threshold {}), min residual {}", rep.det, rep.det_threshold, rep.min_residual)));
    }
    let games: Vec<Result<Game>> = exec.map(samples, |s| game.perturbed(&sample_perturbation(game, delta, rng_seed, s)));
    let games = games.into_iter().collect::<Result<Vec<_>>>()?;
    let mut report = probe_against(game, profile, epsilon, &games, exec)?;
    report.delta = delta;
    report.rng_seed = rng_seed;
    Ok(report)
}

/// Runs the punishment check against explicit perturbed games. No
/// non-degeneracy requirement; used for adversarial perturbations.
pub fn probe_against(game: &Game, profile: &MixedProfile, epsilon: f64, perturbed: &[Game], exec: Execution) -> Result<PunishabilityReport> {
    let base = game.expected_utilities(profile)?;
    let results = exec.map(perturbed.len(), |s| evaluate_sample(&perturbed[s], profile, &base, epsilon));
    let mut failures = Vec::new();
    let mut worst_excess = f64::NEG_INFINITY;
    for (s, r) in results.into_iter().enumerate() {
        match r? {
            SampleResult::Found { excess } => worst_excess = worst_excess.max(excess),
            SampleResult::Failed { reason, excess } => {
                if let Some(e) = excess {
                    worst_excess = worst_excess.max(e);
                }
                failures.push(ProbeFailure { sample: s, perturbed_utilities: perturbed[s].utilities().to_vec(), reason });
            }
        }
    }
    let delta = perturbed.iter().map(|g| game.distance(g)).fold(0.0, f64::max);
    Ok(PunishabilityReport {
        epsilon,
        delta,
        samples: perturbed.len(),
        rng_seed: 0,
        failures,
        worst_excess: if worst_excess.is_finite() { worst_excess } else { 0.0 },
    })
}
