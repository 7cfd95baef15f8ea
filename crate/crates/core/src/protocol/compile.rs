//! Turning desired payoff adjustments into capped rounds of pledges.

use serde::{Deserialize, Serialize};

use crate::commitment::{CommitmentRound, Pledge};
use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile, ProfileIter};

/// Elementary commitments of the row-operation constructions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ElementaryCommitment {
    /// `player` burns `amount` at `outcome`.
    P { player: usize, outcome: Vec<usize>, amount: f64 },
    /// `player` burns `amount` at every `(a', outcome_{-i})` with `a' != outcome_i`.
    M { player: usize, outcome: Vec<usize>, amount: f64 },
    /// Shifts the coefficients of the indifference row `(player, action)` by
    /// `shift`, indexed by the opponents' profiles in lexicographic order.
    R { player: usize, action: usize, shift: Vec<f64> },
}

/// Literal expansion into burns (reference action is action 0). `R` uses
/// `P` for positive and `M` for negative coefficient changes.
pub fn compile_elementary(counts: &[usize], ec: &ElementaryCommitment) -> Result<Vec<Pledge>> {
    match ec {
        ElementaryCommitment::P { player, outcome, amount } => {
            check_positive(*amount)?;
            Ok(vec![Pledge::burn(*player, outcome.clone(), *amount)])
        }
        ElementaryCommitment::M { player, outcome, amount } => {
            check_positive(*amount)?;
            Ok((0..counts[*player])
                .filter(|&a| a != outcome[*player])
                .map(|a| {
                    let mut o = outcome.clone();
                    o[*player] = a;
                    Pledge::burn(*player, o, *amount)
                })
                .collect())
        }
        ElementaryCommitment::R { player, action, shift } => {
            let opp = opponent_profiles(counts, *player);
            if shift.len() != opp.len() {
                return Err(Error::Shape(format!("R shift has {} coefficients, row has {}", shift.len(), opp.len())));
            }
            let mut out = Vec::new();
            for (b, &x) in opp.iter().zip(shift) {
                let outcome = with_action(b, *player, *action);
                if x > 0.0 {
                    out.push(Pledge::burn(*player, outcome, x));
                } else if x < 0.0 {
                    let m = ElementaryCommitment::M { player: *player, outcome, amount: -x };
                    out.extend(compile_elementary(counts, &m)?);
                }
            }
            Ok(out)
        }
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Shape(format!("elementary commitment amount must be positive, got {x}")))
    }
}

/// All opponent profiles of `player` (the player's own slot is dropped),
/// in lexicographic order.
pub fn opponent_profiles(counts: &[usize], player: usize) -> Vec<Vec<usize>> {
    let mut c = counts.to_vec();
    c.remove(player);
    ProfileIter::new(&c).collect()
}

/// Inserts `action` for `player` into an opponent profile.
pub fn with_action(opponents: &[usize], player: usize, action: usize) -> Vec<usize> {
    let mut o = opponents.to_vec();
    o.insert(player, action);
    o
}

/// Burns realizing the coefficient changes `deltas[k][b]` of
/// `u_i(ref, b) - u_i(k, b)` for every action `k` of `player` (row `ref` is
/// ignored) and opponent profile `b`. Per opponent profile, the reference
/// action burns just enough that no other action has to be paid for
/// negatively; profiles where every change is nonnegative leave the
/// reference payoff untouched.
pub fn incentive_burns(counts: &[usize], player: usize, reference: usize, deltas: &[Vec<f64>]) -> Vec<(Vec<usize>, f64)> {
    let opp = opponent_profiles(counts, player);
    let mut out = Vec::new();
    for (bi, b) in opp.iter().enumerate() {
        let ref_burn = (0..counts[player]).filter(|&k| k != reference).map(|k| -deltas[k][bi]).fold(0.0, f64::max);
        for k in 0..counts[player] {
            let amount = if k == reference { ref_burn } else { deltas[k][bi] + ref_burn };
            if amount > 0.0 {
                out.push((with_action(b, player, k), amount));
            }
        }
    }
    out
}

/// Splits a set of same-payer burns into rounds: the largest fraction of the
/// whole adjustment that keeps every amount within `delta`, repeated, with a
/// final partial round.
pub fn chunk_burns(player: usize, burns: &[(Vec<usize>, f64)], delta: f64) -> Vec<Vec<Pledge>> {
    chunk_scaled(burns, delta, |outcome, amount| Pledge::burn(player, outcome.to_vec(), amount))
}

pub(crate) fn chunk_scaled<F>(items: &[(Vec<usize>, f64)], delta: f64, make: F) -> Vec<Vec<Pledge>>
where
    F: Fn(&[usize], f64) -> Pledge,
{
    let max = items.iter().map(|(_, a)| *a).fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let step = delta / max;
    let mut done = 0.0;
    let mut rounds = Vec::new();
    while done < 1.0 - 1e-12 {
        let frac = step.min(1.0 - done);
        rounds.push(items.iter().filter(|(_, a)| *a > 0.0).map(|(o, a)| make(o, (a * frac).min(delta))).collect());
        done += frac;
    }
    rounds
}

/// Rounds from several independent per-player tracks run side by side:
/// round `k` carries the `k`-th entry of every track.
pub fn merge_tracks(tracks: Vec<Vec<Vec<Pledge>>>) -> Vec<CommitmentRound> {
    let len = tracks.iter().map(Vec::len).max().unwrap_or(0);
    (0..len).map(|k| CommitmentRound::new(tracks.iter().filter_map(|t| t.get(k)).flat_map(|p| p.iter().cloned()).collect())).collect()
}

/// Per-player relabeling with `perms[i][new] = old`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relabeling {
    pub perms: Vec<Vec<usize>>,
}

impl Relabeling {
    pub fn identity(counts: &[usize]) -> Self {
        Self { perms: counts.iter().map(|&c| (0..c).collect()).collect() }
    }

    /// Moves `first[i]` to label 0 and `second[i]` (when given) to label 1,
    /// keeping the remaining actions in order.
    pub fn leading(counts: &[usize], first: &[usize], second: &[Option<usize>]) -> Self {
        let perms = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let mut p = vec![first[i]];
                if let Some(s) = second.get(i).copied().flatten() {
                    if s != first[i] {
                        p.push(s);
                    }
                }
                let rest: Vec<usize> = (0..c).filter(|a| !p.contains(a)).collect();
                p.extend(rest);
                p
            })
            .collect();
        Self { perms }
    }

    pub fn game(&self, game: &Game) -> Game {
        game.permute_actions(&self.perms)
    }

    pub fn profile(&self, sigma: &MixedProfile) -> MixedProfile {
        sigma.permute(&self.perms)
    }

    pub fn to_original(&self, outcome: &[usize]) -> Vec<usize> {
        outcome.iter().enumerate().map(|(i, &a)| self.perms[i][a]).collect()
    }

    pub fn round_to_original(&self, round: &CommitmentRound) -> CommitmentRound {
        CommitmentRound::new(round.pledges.iter().map(|p| Pledge { outcome: self.to_original(&p.outcome), ..p.clone() }).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.perms.iter().all(|p| p.iter().enumerate().all(|(a, &b)| a == b))
    }
}
