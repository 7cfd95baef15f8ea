//! Two players with two actions each and a full-support equilibrium.
//!
//! Each player's incentive is the pair `d_i(b) = u_i(0_i, b) - u_i(1_i, b)`
//! (after relabeling the target to `(0, 0)`). A full-support equilibrium
//! needs both entries nonzero with opposite signs: either the player follows
//! the opponent (`d(0) > 0 > d(1)`) or it avoids the opponent
//! (`d(0) < 0 < d(1)`). Followers already prefer the target; avoiders shrink
//! both gaps to `delta` and then close them together in one last round.

use super::compile::Relabeling;
use super::partial::{empty_plan, plan_from};
use super::plan::{CaseTag, PlanStage, ProtocolPlan};
use crate::commitment::{CommitmentRound, Mode, Pledge};
use crate::equilibria::is_pure_nash;
use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncentiveType {
    Indifferent,
    Follower,
    Avoider,
    Other,
}

/// `d_i(0), d_i(1)` for `player` in a 2x2 game (own action 0 vs 1 against
/// each opponent action).
pub fn incentive_pair(game: &Game, player: usize) -> [f64; 2] {
    let at = |own: usize, opp: usize| {
        let mut a = [0, 0];
        a[player] = own;
        a[1 - player] = opp;
        game.utility(player, &a)
    };
    [at(0, 0) - at(1, 0), at(0, 1) - at(1, 1)]
}

pub fn incentive_type(d: [f64; 2]) -> IncentiveType {
    match (d[0], d[1]) {
        (a, b) if a == 0.0 && b == 0.0 => IncentiveType::Indifferent,
        (a, b) if a > 0.0 && b < 0.0 => IncentiveType::Follower,
        (a, b) if a < 0.0 && b > 0.0 => IncentiveType::Avoider,
        _ => IncentiveType::Other,
    }
}

/// Fraction of the cap by which the closing round overshoots each remaining
/// gap. Closing exactly would leave ties that rounding can break either way.
pub const CLOSING_OVERSHOOT: f64 = 1e-3;

/// Largest admissible cap (exclusive): every player's smallest incentive gap.
pub fn delta_bound(game: &Game, target: &[usize]) -> f64 {
    let relabel = Relabeling::leading(game.action_counts(), target, &[]);
    let g = relabel.game(game);
    (0..2)
        .map(|i| incentive_pair(&g, i))
        .filter(|d| matches!(incentive_type(*d), IncentiveType::Follower | IncentiveType::Avoider))
        .map(|d| d[0].abs().min(d[1].abs()))
        .fold(f64::INFINITY, f64::min)
}

fn outcome(player: usize, own: usize, opp: usize) -> Vec<usize> {
    let mut a = vec![0, 0];
    a[player] = own;
    a[1 - player] = opp;
    a
}

/// Repeatedly spends `min(delta, remaining)` until `total` is used up.
fn installments(total: f64, delta: f64) -> Vec<f64> {
    let mut left = total;
    let mut out = Vec::new();
    while left > 1e-12 {
        let a = left.min(delta);
        out.push(a);
        left -= a;
    }
    out
}

/// Plan for a 2x2 game with a full-support equilibrium.
pub fn build_two_by_two_plan(game: &Game, sigma: &MixedProfile, target: &[usize], delta: f64) -> Result<ProtocolPlan> {
    if game.action_counts() != [2, 2] || !sigma.has_full_support() {
        return Err(Error::Hypothesis("expects a 2x2 game and a full-support equilibrium".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let case = CaseTag::TwoByTwo;
    if is_pure_nash(game, target, 0.0) {
        return empty_plan(game, sigma, target, case, delta, Mode::BurnOnly);
    }
    if delta >= delta_bound(game, target) {
        return Err(Error::InvalidDelta(delta));
    }
    let relabel = Relabeling::leading(game.action_counts(), target, &[]);
    let g = relabel.game(game);
    let types: Vec<IncentiveType> = (0..2).map(|i| incentive_type(incentive_pair(&g, i))).collect();
    if types.iter().any(|t| matches!(t, IncentiveType::Indifferent | IncentiveType::Other)) {
        return Err(Error::Degenerate("2x2 equilibrium needs strict opposite-signed incentives".into()));
    }

    // lifts run first; the gap phases are right-aligned so that no player sits
    // at a gap of one cap (closable alone) while the other is still shrinking
    let mut lifts: Vec<Vec<Vec<Pledge>>> = Vec::with_capacity(2);
    let mut gaps: Vec<Vec<Vec<Pledge>>> = Vec::with_capacity(2);
    for i in 0..2 {
        let mut lift_track = Vec::new();
        // lift the target above both outcomes where the opponent plays 1
        let top = g.utility(i, &outcome(i, 0, 1)).max(g.utility(i, &outcome(i, 1, 1)));
        let lift = g.utility(i, &[0, 0]) - top;
        if lift <= 0.0 {
            let rounds = (-lift / delta).floor() as usize + 1;
            for _ in 0..rounds {
                lift_track.push(vec![Pledge::burn(i, outcome(i, 0, 1), delta), Pledge::burn(i, outcome(i, 1, 1), delta)]);
            }
        }
        let mut gap_track = Vec::new();
        if types[i] == IncentiveType::Avoider {
            let d = incentive_pair(&g, i);
            let keep = delta * (1.0 - CLOSING_OVERSHOOT);
            let first = installments(-d[0] - keep, delta);
            let second = installments(d[1] - keep, delta);
            let m = first.len().max(second.len());
            let (pad1, pad2) = (m - first.len(), m - second.len());
            for k in 0..m {
                let mut r = Vec::new();
                if k >= pad1 {
                    r.push(Pledge::burn(i, outcome(i, 1, 0), first[k - pad1]));
                }
                if k >= pad2 {
                    r.push(Pledge::burn(i, outcome(i, 0, 1), second[k - pad2]));
                }
                gap_track.push(r);
            }
        }
        lifts.push(lift_track);
        gaps.push(gap_track);
    }
    let total = (0..2).map(|i| lifts[i].len() + gaps[i].len()).max().unwrap_or(0);
    let tracks: Vec<Vec<Vec<Pledge>>> = (0..2)
        .map(|i| {
            let pad = total - lifts[i].len() - gaps[i].len();
            let mut t = lifts[i].clone();
            t.extend(std::iter::repeat_n(Vec::new(), pad));
            t.extend(gaps[i].iter().cloned());
            t
        })
        .collect();
    let mut rounds = super::compile::merge_tracks(tracks);
    // both avoiders close their remaining gaps together
    let last: Vec<Pledge> = (0..2)
        .filter(|&i| types[i] == IncentiveType::Avoider)
        .flat_map(|i| [Pledge::burn(i, outcome(i, 1, 0), delta), Pledge::burn(i, outcome(i, 0, 1), delta)])
        .collect();
    if !last.is_empty() {
        rounds.push(CommitmentRound::new(last));
    }
    let rounds: Vec<CommitmentRound> = rounds.iter().map(|r| relabel.round_to_original(r)).collect();
    let stage = PlanStage {
        case,
        from_round: 0,
        to_round: rounds.len(),
        baseline: sigma.clone(),
        reference_support: sigma.supports(),
        ceiling: game.payoffs(target).to_vec(),
        pure_fallback: true,
        baseline_fixed: false,
        target_fixed: true,
        label: "shrink the avoiders' gaps, then close them".into(),
    };
    plan_from(game, sigma, target, case, delta, Mode::BurnOnly, rounds, vec![stage], Some(&relabel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::find_punishment_or_pure;
    use crate::sample;

    #[test]
    fn classifies_incentives() {
        assert_eq!(incentive_type([1.0, -2.0]), IncentiveType::Follower);
        assert_eq!(incentive_type([-1.0, 2.0]), IncentiveType::Avoider);
        assert_eq!(incentive_type([0.0, 0.0]), IncentiveType::Indifferent);
        assert_eq!(incentive_type([1.0, 2.0]), IncentiveType::Other);
    }

    #[test]
    fn constructed_instances_end_at_target_with_punishments() {
        let mut rng = sample::rng(23);
        let mut built = 0;
        while built < 5 {
            let (g, sigma, t) = sample::full_support_instance(&mut rng, &[2, 2], 0.5);
            if is_pure_nash(&g, &t, 0.0) {
                continue;
            }
            let delta = 0.5 * delta_bound(&g, &t).min(1.0);
            let plan = build_two_by_two_plan(&g, &sigma, &t, delta).unwrap();
            let games = plan.prefix_games(&g).unwrap();
            let ceiling = g.payoffs(&t).to_vec();
            for h in &games {
                assert_eq!(h.payoffs(&t), g.payoffs(&t));
                let p = find_punishment_or_pure(h, &sigma.supports(), Some(&sigma), &ceiling).unwrap();
                assert!(p.is_some());
            }
            assert!(is_pure_nash(games.last().unwrap(), &t, 1e-12));
            built += 1;
        }
    }
}
