//! Three or more players, full support: coefficient shifts that leave both the
//! value and the gradient of the characteristic function unchanged at the
//! equilibrium.

use super::compile::{chunk_burns, incentive_burns, merge_tracks, opponent_profiles, Relabeling};
use super::partial::{empty_plan, plan_from};
use super::plan::{CaseTag, PlanStage, ProtocolPlan};
use crate::commitment::{CommitmentRound, Mode};
use crate::equilibria::is_pure_nash;
use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile};

/// Shift array for the indifference rows of `player`, indexed by the
/// opponents' profiles in lexicographic order. Entries are nonzero only where
/// every opponent plays action 0 or 1; there the value is
/// `(-1)^{#ones} * prod_j sigma_j(1 - b_j)`. Adding any multiple of it to a
/// row's coefficients keeps the row's value and gradient at `sigma`.
pub fn gradient_neutral_array(sigma: &MixedProfile, player: usize) -> Vec<f64> {
    let counts: Vec<usize> = sigma.probs().iter().map(Vec::len).collect();
    opponent_profiles(&counts, player)
        .iter()
        .map(|b| {
            if b.iter().any(|&a| a > 1) {
                return 0.0;
            }
            let others = (0..counts.len()).filter(|&j| j != player);
            let mag: f64 = others.zip(b).map(|(j, &a)| sigma.prob(j, 1 - a)).product();
            let ones = b.iter().filter(|&&a| a == 1).count();
            if ones % 2 == 0 {
                mag
            } else {
                -mag
            }
        })
        .collect()
}

/// Plan for three or more players with a full-support `sigma`.
pub fn build_multiplayer_plan(game: &Game, sigma: &MixedProfile, target: &[usize], delta: f64) -> Result<ProtocolPlan> {
    let counts = game.action_counts();
    if counts.len() < 3 || !sigma.has_full_support() {
        return Err(Error::Hypothesis("expects three or more players and a full-support equilibrium".into()));
    }
    if counts.iter().any(|&c| c < 2) {
        return Err(Error::Hypothesis("every player needs at least two actions".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let case = CaseTag::FullSupportNp;
    if is_pure_nash(game, target, 0.0) {
        return empty_plan(game, sigma, target, case, delta, Mode::BurnOnly);
    }
    let relabel = Relabeling::leading(counts, target, &[]);
    let g = relabel.game(game);
    let s = relabel.profile(sigma);
    let zero = vec![0; counts.len()];
    let mut tracks = Vec::with_capacity(counts.len());
    for i in 0..counts.len() {
        let x = gradient_neutral_array(&s, i);
        let x0 = x[0];
        let mut dev = zero.clone();
        let deltas: Vec<Vec<f64>> = (0..counts[i])
            .map(|k| {
                if k == 0 {
                    return vec![0.0; x.len()];
                }
                dev[i] = k;
                // coefficient at the all-zeros opponent profile
                let c = g.utility(i, &zero) - g.utility(i, &dev);
                if c >= 0.0 {
                    vec![0.0; x.len()]
                } else {
                    // overshoot to |c| so the target ends strictly preferred
                    let lambda = -2.0 * c / x0;
                    x.iter().map(|v| lambda * v).collect()
                }
            })
            .collect();
        let burns = incentive_burns(g.action_counts(), i, 0, &deltas);
        tracks.push(chunk_burns(i, &burns, delta));
    }
    let rounds: Vec<CommitmentRound> = merge_tracks(tracks).iter().map(|r| relabel.round_to_original(r)).collect();
    let base = game.expected_utilities(sigma)?;
    let margin = game.pareto_improves(target, sigma)?.margin;
    let stage = PlanStage {
        case,
        from_round: 0,
        to_round: rounds.len(),
        baseline: sigma.clone(),
        reference_support: sigma.supports(),
        ceiling: base.iter().map(|u| u + margin).collect(),
        pure_fallback: false,
        baseline_fixed: true,
        target_fixed: true,
        label: "gradient-neutral coefficient shifts".into(),
    };
    plan_from(game, sigma, target, case, delta, Mode::BurnOnly, rounds, vec![stage], Some(&relabel))
}
