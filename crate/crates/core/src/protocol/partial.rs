//! Constructions for equilibria without full support: pure burning outside
//! the support until the target becomes an equilibrium, with a detour
//! through an auxiliary pure equilibrium when the target lies inside the
//! support.

use super::classify::classify_case;
use super::compile::{chunk_burns, merge_tracks, opponent_profiles, with_action, Relabeling};
use super::plan::{CaseTag, PlanStage, ProtocolPlan};
use crate::commitment::{CommitmentRound, Mode, Pledge};
use crate::equilibria::is_pure_nash;
use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile, OutcomeTarget, TargetRole};
use crate::tol::EQ_TOL;

/// Guard added to strict inequalities that must survive float rounding.
const STRICT_GUARD: f64 = 1e-9;

/// Rounds making `target` an equilibrium by burning on its unilateral
/// deviations, while keeping `baseline` an equilibrium with unchanged support.
///
/// Each player `i` needs total burn `T_i = max_{a'} u_i(a', t_{-i}) - u_i(t) + margin`
/// (floored at 0) on every `(a', t_{-i})`. When the opponents' target actions
/// are all in the baseline support (weight `w_i > 0`), that burn also lowers
/// the baseline value of the player's supported actions by `T_i w_i`, so the
/// player first burns `max(T_i, T_i w_i / (1 - w_i))` on every `(t_i, a_{-i})`
/// with `a_{-i} != t_{-i}` to keep its unsupported target action unattractive.
pub(crate) fn burn_schedule(game: &Game, baseline: &MixedProfile, target: &[usize], delta: f64, margin: f64) -> Result<Vec<CommitmentRound>> {
    let n = game.num_players();
    let counts = game.action_counts();
    let mut tracks = Vec::with_capacity(n);
    for i in 0..n {
        let u_t = game.utility(i, target);
        let mut dev = target.to_vec();
        let mut best = f64::NEG_INFINITY;
        for a in (0..counts[i]).filter(|&a| a != target[i]) {
            dev[i] = a;
            best = best.max(game.utility(i, &dev));
        }
        let total = (best - u_t + margin).max(0.0);
        if total <= 0.0 || !best.is_finite() {
            tracks.push(Vec::new());
            continue;
        }
        let w = baseline.weight_excluding(target, &[i]);
        let mut track = Vec::new();
        if w > 0.0 {
            if w >= 1.0 - 1e-12 {
                return Err(Error::Hypothesis(format!("player {} cannot be separated from the baseline: opponents play the target for sure", i + 1)));
            }
            let pre = total.max(total * w / (1.0 - w));
            let burns: Vec<(Vec<usize>, f64)> = opponent_profiles(counts, i)
                .into_iter()
                .map(|b| with_action(&b, i, target[i]))
                .filter(|o| o.as_slice() != target)
                .map(|o| (o, pre))
                .collect();
            track.extend(chunk_burns(i, &burns, delta));
        }
        let burns: Vec<(Vec<usize>, f64)> = (0..counts[i])
            .filter(|&a| a != target[i])
            .map(|a| {
                let mut o = target.to_vec();
                o[i] = a;
                (o, total)
            })
            .collect();
        track.extend(chunk_burns(i, &burns, delta));
        tracks.push(track);
    }
    Ok(merge_tracks(tracks))
}

/// Burns `delta` per round at `outcome` until every player is strictly below
/// its payoff at `target`.
fn push_below(game: &Game, outcome: &[usize], target: &[usize], delta: f64) -> Vec<CommitmentRound> {
    let tracks = (0..game.num_players())
        .map(|i| {
            let gap = game.utility(i, outcome) - game.utility(i, target);
            let rounds = if gap >= 0.0 { (gap / delta).floor() as usize + 1 } else { 0 };
            vec![vec![Pledge::burn(i, outcome.to_vec(), delta)]; rounds]
        })
        .collect();
    merge_tracks(tracks)
}

fn apply_all(game: &Game, rounds: &[CommitmentRound]) -> Result<Game> {
    rounds.iter().try_fold(game.clone(), |g, r| g.apply_transfers(r))
}

fn ceiling_from(game: &Game, baseline: &MixedProfile, target: &[usize]) -> Result<Vec<f64>> {
    let base = game.expected_utilities(baseline)?;
    let margin = game.pareto_improves(target, baseline)?.margin;
    Ok(base.iter().map(|u| u + margin).collect())
}

/// Lexicographically smallest profile differing from `target` in every
/// coordinate and lying outside the support of `sigma`.
pub fn auxiliary_outcome(game: &Game, sigma: &MixedProfile, target: &[usize]) -> Option<Vec<usize>> {
    let supports = sigma.supports();
    game.profiles().find(|a| a.iter().zip(target).all(|(x, t)| x != t) && a.iter().enumerate().any(|(j, x)| !supports[j].contains(x)))
}

pub(crate) fn empty_plan(game: &Game, sigma: &MixedProfile, target: &[usize], case: CaseTag, delta: f64, mode: Mode) -> Result<ProtocolPlan> {
    let stage = PlanStage {
        case,
        from_round: 0,
        to_round: 0,
        baseline: sigma.clone(),
        reference_support: sigma.supports(),
        ceiling: game.expected_utilities(sigma)?,
        pure_fallback: false,
        baseline_fixed: true,
        target_fixed: true,
        label: "target already an equilibrium".into(),
    };
    plan_from(game, sigma, target, case, delta, mode, Vec::new(), vec![stage], None)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn plan_from(
    game: &Game,
    sigma: &MixedProfile,
    target: &[usize],
    case: CaseTag,
    delta: f64,
    mode: Mode,
    rounds: Vec<CommitmentRound>,
    stages: Vec<PlanStage>,
    relabeling: Option<&Relabeling>,
) -> Result<ProtocolPlan> {
    let perms = relabeling.cloned().unwrap_or_else(|| Relabeling::identity(game.action_counts())).perms;
    let mut plan = ProtocolPlan {
        case_tag: case,
        delta,
        mode,
        base_hash: String::new(),
        permutation: perms,
        rounds,
        target: OutcomeTarget::new(game, target.to_vec(), TargetRole::ParetoImprover)?,
        baseline: sigma.clone(),
        stages,
        checkpoints: Vec::new(),
        expected_terminal_payoffs: Vec::new(),
    };
    plan.seal(game)?;
    Ok(plan)
}

/// Plan for an equilibrium without full support (target outside the support,
/// or inside it with a detour through an auxiliary pure equilibrium).
pub fn build_partial_support_plan(game: &Game, sigma: &MixedProfile, target: &[usize], delta: f64) -> Result<ProtocolPlan> {
    if !(delta > 0.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let case = classify_case(game, sigma, target)?;
    build_partial_unchecked(game, sigma, target, delta, case)
}

/// Same construction without the hypothesis checks (used to build naive
/// plans for degenerate inputs).
pub fn build_partial_unchecked(game: &Game, sigma: &MixedProfile, target: &[usize], delta: f64, case: CaseTag) -> Result<ProtocolPlan> {
    let mode = Mode::BurnOnly;
    if is_pure_nash(game, target, 0.0) {
        return empty_plan(game, sigma, target, case, delta, mode);
    }
    match case {
        CaseTag::PartialSupportDisjoint | CaseTag::PartialSupportMixed => {
            let rounds = burn_schedule(game, sigma, target, delta, 0.0)?;
            let stage = PlanStage {
                case,
                from_round: 0,
                to_round: rounds.len(),
                baseline: sigma.clone(),
                reference_support: sigma.supports(),
                ceiling: ceiling_from(game, sigma, target)?,
                pure_fallback: false,
                baseline_fixed: true,
                target_fixed: true,
                label: "burn on the target's deviations".into(),
            };
            plan_from(game, sigma, target, case, delta, mode, rounds, vec![stage], None)
        }
        CaseTag::InSupportIndirect => build_indirect(game, sigma, target, delta),
        other => Err(Error::Hypothesis(format!("case {} is not a partial-support case", other.as_str()))),
    }
}

fn build_indirect(game: &Game, sigma: &MixedProfile, target: &[usize], delta: f64) -> Result<ProtocolPlan> {
    let aux = auxiliary_outcome(game, sigma, target)
        .ok_or_else(|| Error::Infeasible("no outcome differs from the target in every coordinate outside the support".into()))?;
    let ceiling = ceiling_from(game, sigma, target)?;
    let mut rounds = push_below(game, &aux, target, delta);
    let after_push = apply_all(game, &rounds)?;
    let stage1 = PlanStage {
        case: CaseTag::InSupportIndirect,
        from_round: 0,
        to_round: rounds.len(),
        baseline: sigma.clone(),
        reference_support: sigma.supports(),
        ceiling: ceiling.clone(),
        pure_fallback: false,
        baseline_fixed: true,
        target_fixed: true,
        label: "push the auxiliary outcome below the target".into(),
    };

    let make_aux = burn_schedule(&after_push, sigma, &aux, delta, delta + STRICT_GUARD)?;
    let start2 = rounds.len();
    rounds.extend(make_aux);
    let after_aux = apply_all(game, &rounds)?;
    let stage2 =
        PlanStage { from_round: start2, to_round: rounds.len(), label: "make the auxiliary outcome a strict equilibrium".into(), ..stage1.clone() };

    let aux_profile = MixedProfile::pure(game.action_counts(), &aux);
    if !is_pure_nash(&after_aux, &aux, -delta) {
        return Err(Error::Infeasible("auxiliary outcome did not become a strict equilibrium".into()));
    }
    let to_target = burn_schedule(&after_aux, &aux_profile, target, delta, 0.0)?;
    let start3 = rounds.len();
    rounds.extend(to_target);
    let aux_ceiling = ceiling_from(&after_aux, &aux_profile, target)?;
    if aux_ceiling.iter().zip(after_aux.payoffs(&aux)).any(|(c, u)| c - u <= EQ_TOL) {
        return Err(Error::Infeasible("target does not strictly improve the auxiliary outcome".into()));
    }
    let stage3 = PlanStage {
        case: CaseTag::InSupportIndirect,
        from_round: start3,
        to_round: rounds.len(),
        baseline: aux_profile.clone(),
        reference_support: aux_profile.supports(),
        ceiling: aux_ceiling,
        pure_fallback: false,
        baseline_fixed: true,
        target_fixed: true,
        label: "burn on the target's deviations from the auxiliary equilibrium".into(),
    };
    let mut stages = vec![stage1, stage2, stage3];
    stages.retain(|s| s.to_round > s.from_round);
    if stages.is_empty() {
        return empty_plan(game, sigma, target, CaseTag::InSupportIndirect, delta, Mode::BurnOnly);
    }
    plan_from(game, sigma, target, CaseTag::InSupportIndirect, delta, Mode::BurnOnly, rounds, stages, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::equilibria::is_nash;

    fn uniform3() -> MixedProfile {
        MixedProfile::uniform_on(&[4, 4], &[vec![0, 1, 2], vec![0, 1, 2]])
    }

    #[test]
    fn disjoint_case_reaches_target() {
        let g = catalog::rps_with_exit();
        let plan = build_partial_support_plan(&g, &uniform3(), &[3, 3], 0.25).unwrap();
        assert_eq!(plan.case_tag, CaseTag::PartialSupportDisjoint);
        let games = plan.prefix_games(&g).unwrap();
        for h in &games {
            assert!(is_nash(h, &uniform3(), 1e-9).unwrap().is_nash);
            assert_eq!(h.payoffs(&[3, 3]), &[4.0, 4.0]);
        }
        assert!(is_pure_nash(games.last().unwrap(), &[3, 3], 1e-12));
        assert_eq!(plan.expected_terminal_payoffs, vec![4.0, 4.0]);
        // player 1 must bring u_1(a1, a4) = 6 down to 4
        assert_eq!(plan.num_rounds(), 8);
    }

    #[test]
    fn mixed_case_pre_burns_one_unit() {
        let g = catalog::rps_with_exit_variant();
        let plan = build_partial_support_plan(&g, &uniform3(), &[3, 2], 0.25).unwrap();
        assert_eq!(plan.case_tag, CaseTag::PartialSupportMixed);
        let mut pre = std::collections::BTreeMap::new();
        for p in plan.rounds.iter().flat_map(|r| r.pledges.iter()).filter(|p| p.payer == 0 && p.outcome[0] == 3) {
            *pre.entry(p.outcome.clone()).or_insert(0.0) += p.amount;
        }
        assert_eq!(pre.len(), 3);
        for (o, total) in pre {
            assert!(o != vec![3, 2]);
            assert!((total - 1.0).abs() < 1e-12, "{o:?} {total}");
        }
        let games = plan.prefix_games(&g).unwrap();
        for h in &games {
            assert!(is_nash(h, &uniform3(), 1e-9).unwrap().is_nash);
        }
        assert!(is_pure_nash(games.last().unwrap(), &[3, 2], 1e-12));
    }

    #[test]
    fn indirect_case_goes_through_auxiliary_equilibrium() {
        let g = Game::bimatrix(&[
            vec![(2.0, 2.0), (0.0, 3.0), (0.0, -5.0)],
            vec![(3.0, 0.0), (-1.0, -1.0), (0.0, -5.0)],
            vec![(-5.0, 0.0), (-5.0, 0.0), (-5.0, -5.0)],
        ])
        .unwrap();
        let half = MixedProfile::new(vec![vec![0.5, 0.5, 0.0]; 2]).unwrap();
        let t = [0, 0];
        assert_eq!(classify_case(&g, &half, &t).unwrap(), CaseTag::InSupportIndirect);
        let plan = build_partial_support_plan(&g, &half, &t, 0.2).unwrap();
        assert_eq!(auxiliary_outcome(&g, &half, &t).unwrap(), vec![1, 2]);
        let games = plan.prefix_games(&g).unwrap();
        for (k, h) in games.iter().enumerate() {
            let st = plan.stage_at(k);
            assert!(is_nash(h, &st.baseline, 1e-9).unwrap().is_nash, "checkpoint {k}");
            assert_eq!(h.payoffs(&t), g.payoffs(&t));
        }
        assert!(is_pure_nash(games.last().unwrap(), &t, 1e-12));
        assert_eq!(plan.stages.last().unwrap().baseline.as_pure(), Some(vec![1, 2]));
    }

    #[test]
    fn target_already_nash_gives_empty_plan() {
        let g = catalog::unfair_split();
        let aa = MixedProfile::pure(&[2, 2], &[0, 0]);
        let plan = build_partial_unchecked(&g, &aa, &[0, 0], 1.0, CaseTag::InSupportIndirect).unwrap();
        assert_eq!(plan.num_rounds(), 0);
    }
}
