//! Golden checks of the worked examples, one row per check.

use anyhow::Result;
use commitment_games::commitment::Mode;
use commitment_games::equilibria::{build_characteristic_system, enumerate_pure_nash, is_nash, is_non_degenerate, is_pure_nash, solve_on_support};
use commitment_games::protocol::{build_improvement_plan, build_partial_unchecked, build_welfare_plan, shape_case};
use commitment_games::verify::{check_deviations, commitment_grid, verify_plan, VerifyOptions};
use commitment_games::{catalog, CommitmentRound, Execution, Game, MixedProfile, Pledge};

pub const IDS: [&str; 8] = [
    "reciprocal-pledges",
    "chicken-pledge",
    "unfair-split",
    "rps-exit",
    "rps-exit-variant",
    "three-player",
    "coordination-system",
    "first-mover-trap",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub id: &'static str,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

fn row(id: &'static str, check: &str, passed: bool, detail: impl Into<String>) -> Row {
    Row { id, check: check.into(), passed, detail: detail.into() }
}

fn labels(g: &Game, profiles: &[Vec<usize>]) -> String {
    profiles.iter().map(|a| g.profile_label(a)).collect::<Vec<_>>().join(" ")
}

/// Whether `action` is weakly dominant for `player` (ties within 1e-12).
pub fn dominant(game: &Game, player: usize, action: usize) -> bool {
    game.profiles().all(|a| {
        let mut b = a.clone();
        b[player] = action;
        game.utility(player, &b) >= game.utility(player, &a) - 1e-12
    })
}

/// Both players promise 1 to the other at every outcome where the other
/// cooperates.
pub fn reciprocal_pledges() -> CommitmentRound {
    CommitmentRound::new(vec![
        Pledge::transfer(0, vec![0, 0], 1, 1.0),
        Pledge::transfer(0, vec![1, 0], 1, 1.0),
        Pledge::transfer(1, vec![0, 0], 0, 1.0),
        Pledge::transfer(1, vec![0, 1], 0, 1.0),
    ])
}

/// Player 1 pays the cap to player 2 at (A,B) and burns the cap at (A,A).
pub fn trap_move(delta: f64) -> CommitmentRound {
    CommitmentRound::new(vec![Pledge::transfer(0, vec![0, 1], 1, delta), Pledge::burn(0, vec![0, 0], delta)])
}

fn plan_rows(
    id: &'static str,
    game: &Game,
    plan: Result<commitment_games::protocol::ProtocolPlan, commitment_games::Error>,
    exec: Execution,
) -> Result<Vec<Row>> {
    let plan = match plan {
        Ok(p) => p,
        Err(e) => return Ok(vec![row(id, "plan builds", false, e.to_string())]),
    };
    let report = verify_plan(game, &plan, &VerifyOptions { exec, ..VerifyOptions::default() })?;
    let t = &plan.target.profile;
    Ok(vec![
        row(id, "plan builds", true, format!("{} rounds at cap {}", plan.num_rounds(), plan.delta)),
        row(
            id,
            "target is an equilibrium at the end",
            is_pure_nash(&plan.terminal_game(game)?, t, 1e-9),
            format!("{} pays {:?}", game.profile_label(t), plan.expected_terminal_payoffs),
        ),
        row(
            id,
            "grid-certified",
            report.accepted,
            report.deviation_results.classes.iter().map(|c| format!("{:?} {:.3e}", c.class, c.worst_gain)).collect::<Vec<_>>().join(", "),
        ),
    ])
}

pub fn run(id: &str, exec: Execution) -> Result<Vec<Row>> {
    let id: &'static str =
        IDS.iter().find(|k| **k == id).copied().ok_or_else(|| anyhow::anyhow!("unknown example `{id}`; known: {}", IDS.join(", ")))?;
    let mut rows = Vec::new();
    match id {
        "reciprocal-pledges" => {
            let g = catalog::prisoners_dilemma();
            let after = g.apply_transfers(&reciprocal_pledges())?;
            let expect = catalog::prisoners_dilemma_after_pledges();
            rows.push(row(id, "pledges give the transformed table", after.utilities() == expect.utilities(), format!("{:?}", after.utilities())));
            let ne = enumerate_pure_nash(&after);
            rows.push(row(id, "(C,C) becomes an equilibrium", ne.contains(&vec![0, 0]), labels(&after, &ne)));
        }
        "chicken-pledge" => {
            let g = catalog::chicken();
            let after = g.apply_transfers(&CommitmentRound::new(vec![Pledge::transfer(0, vec![0, 1], 1, 20.0)]))?;
            rows.push(row(id, "entry becomes (-19, 22)", after.payoffs(&[0, 1]) == [-19.0, 22.0], format!("{:?}", after.payoffs(&[0, 1]))));
            let ne = enumerate_pure_nash(&after);
            rows.push(row(id, "only equilibrium is (Straight,Swerve)", ne == vec![vec![1, 0]], labels(&after, &ne)));
        }
        "unfair-split" => {
            let g = catalog::unfair_split();
            let aa = MixedProfile::pure(&[2, 2], &[0, 0]);
            let plan = build_welfare_plan(&g, &aa, &[4.0, 3.0], 1.0)?;
            rows.push(row(id, "six rounds", plan.num_rounds() == 6, format!("{} rounds", plan.num_rounds())));
            let games = plan.prefix_games(&g)?;
            rows.push(row(id, "(A,A) stays an equilibrium", games.iter().all(|h| is_pure_nash(h, &[0, 0], 0.0)), ""));
            let end = games.last().expect("nonempty");
            let pays = end.payoffs(&[1, 1]);
            rows.push(row(
                id,
                "(B,B) ends an equilibrium paying (4, 3)",
                is_pure_nash(end, &[1, 1], 0.0) && (pays[0] - 4.0).abs() <= 1e-12 && (pays[1] - 3.0).abs() <= 1e-12,
                format!("{pays:?}"),
            ));
            rows.extend(plan_rows(id, &g, Ok(plan), exec)?.into_iter().skip(2));
        }
        "rps-exit" => {
            let g = catalog::rps_with_exit();
            let s = MixedProfile::uniform_on(&[4, 4], &[vec![0, 1, 2], vec![0, 1, 2]]);
            rows.extend(plan_rows(id, &g, build_improvement_plan(&g, &s, &[3, 3], 0.25), exec)?);
        }
        "rps-exit-variant" => {
            let g = catalog::rps_with_exit_variant();
            let s = MixedProfile::uniform_on(&[4, 4], &[vec![0, 1, 2], vec![0, 1, 2]]);
            rows.extend(plan_rows(id, &g, build_improvement_plan(&g, &s, &[3, 2], 0.1), exec)?);
        }
        "three-player" => {
            let g = catalog::three_player_full_support();
            let s = MixedProfile::uniform_on(&[2, 2, 2], &vec![vec![0, 1]; 3]);
            rows.push(row(id, "uniform play is non-degenerate", is_non_degenerate(&g, &s)?.non_degenerate, ""));
            rows.extend(plan_rows(id, &g, build_improvement_plan(&g, &s, &[0, 0, 0], 0.05), exec)?);
        }
        "coordination-system" => {
            let g = catalog::three_action_coordination();
            let sup = [vec![0, 1], vec![0, 1]];
            let (m, rhs) = build_characteristic_system(&g, &sup)?.two_player_linear_form()?;
            let expect = [1.0, 1.0, 0.0, 0.0, 4.0, -4.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 4.0, -4.0];
            let got: Vec<f64> = m.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()).collect();
            rows.push(row(id, "matrix and right-hand side", got == expect && rhs.as_slice() == [1.0, 0.0, 1.0, 0.0], format!("{got:?}")));
            let p = solve_on_support(&g, &sup, None)?;
            let half = MixedProfile::uniform_on(&[3, 3], &sup);
            let ok = p.profile().is_some_and(|p| p.max_abs_diff(&half) <= 1e-12);
            rows.push(row(id, "solution is one half each", ok, format!("{p:?}")));
            let d = is_non_degenerate(&g, &half)?;
            rows.push(row(id, "non-degenerate", d.non_degenerate, format!("det {} min residual {}", d.det, d.min_residual)));
        }
        "first-mover-trap" => {
            let g = catalog::first_mover_trap();
            let delta = 0.5;
            let after = g.apply_transfers(&trap_move(delta))?;
            let mut all = true;
            let mut worst = String::new();
            for resp in commitment_grid(&after, 1, delta, Mode::Transfers, &[0.5, 1.0]) {
                let mut round = trap_move(delta);
                round.pledges.extend(resp.clone());
                let h = g.apply_transfers(&round)?;
                if !(dominant(&h, 0, 1) || dominant(&h, 1, 1)) {
                    all = false;
                    worst = format!("{resp:?}");
                }
            }
            rows.push(row(id, "B dominant for someone after every response", all, worst));
            let aa = MixedProfile::pure(&[3, 3], &[0, 0]);
            rows.push(row(id, "(A,A) is an equilibrium", is_nash(&g, &aa, 0.0)?.is_nash, ""));
            let naive = build_partial_unchecked(&g, &aa, &[2, 2], delta, shape_case(&g, &aa, &[2, 2]))?;
            let rep = check_deviations(&g, &naive, &VerifyOptions { exec, ..VerifyOptions::default() })?;
            let gain = rep.classes[0].worst_gain;
            rows.push(row(id, "naive plan rejected", !rep.accepted && gain > 0.0, format!("commitment deviation gains {gain}")));
        }
        _ => unreachable!("checked above"),
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_example_passes() {
        for id in IDS {
            for r in run(id, Execution::Sequential).unwrap() {
                assert!(r.passed, "{r:?}");
            }
        }
    }
}
