use commitment_games::protocol::{build_improvement_plan, build_partial_unchecked, build_welfare_plan, shape_case};
use commitment_games::verify::{check_deviations, check_on_path, choose_delta, verify_plan, PlanRequest, Status, VerifyOptions};
use commitment_games::{catalog, sample, Execution, Game, MixedProfile, SessionState};

fn opts(amounts: &[f64]) -> VerifyOptions {
    VerifyOptions { amounts: amounts.to_vec(), exec: Execution::Sequential, ..VerifyOptions::default() }
}

fn trap_plan() -> (Game, commitment_games::protocol::ProtocolPlan) {
    let g = catalog::first_mover_trap();
    let aa = MixedProfile::pure(&[3, 3], &[0, 0]);
    let plan = build_partial_unchecked(&g, &aa, &[2, 2], 0.5, shape_case(&g, &aa, &[2, 2])).unwrap();
    (g, plan)
}

#[test]
fn refining_the_grid_never_hides_a_failure() {
    let (g, plan) = trap_plan();
    let coarse = check_deviations(&g, &plan, &opts(&[1.0])).unwrap();
    let fine = check_deviations(&g, &plan, &opts(&[0.25, 0.5, 0.75, 1.0])).unwrap();
    assert!(!coarse.accepted && !fine.accepted);
    for (c, f) in coarse.classes.iter().zip(&fine.classes) {
        assert!(f.worst_gain >= c.worst_gain);
    }
    let mut rng = sample::rng(12);
    for _ in 0..3 {
        let (g, sigma, t) = sample::full_support_instance(&mut rng, &[3, 3], 0.5);
        let plan = build_improvement_plan(&g, &sigma, &t, 0.1 * g.utility_range()).unwrap();
        let o = VerifyOptions { budget: Some(6), ..opts(&[1.0]) };
        let coarse = check_deviations(&g, &plan, &o).unwrap();
        let fine = check_deviations(&g, &plan, &VerifyOptions { amounts: vec![0.5, 1.0], ..o }).unwrap();
        assert!(fine.accepted <= coarse.accepted);
    }
}

#[test]
fn every_failure_has_a_replayable_witness() {
    let (g, plan) = trap_plan();
    let rep = verify_plan(&g, &plan, &opts(&[0.5, 1.0])).unwrap();
    assert!(!rep.accepted);
    for c in rep.deviation_results.classes.iter().filter(|c| c.worst_gain > 1e-9) {
        let w = c.witness.as_ref().expect("failing class has a witness");
        let t = w.transcript.as_ref().expect("witness has a transcript");
        let replayed = SessionState::replay(g.clone(), t).unwrap();
        assert_eq!(replayed.transcript(), t);
    }
    for p in rep.properties.values().filter(|p| p.status == Status::Fail) {
        if let Some(t) = &p.witness {
            SessionState::replay(g.clone(), t).unwrap();
        }
    }
}

#[test]
fn ceiling_punishment_implies_punishment_below_target() {
    let u3 = MixedProfile::uniform_on(&[4, 4], &[vec![0, 1, 2], vec![0, 1, 2]]);
    let mut plans = vec![
        (catalog::rps_with_exit(), build_improvement_plan(&catalog::rps_with_exit(), &u3, &[3, 3], 0.1).unwrap()),
        (catalog::rps_with_exit_variant(), build_improvement_plan(&catalog::rps_with_exit_variant(), &u3, &[3, 2], 0.1).unwrap()),
    ];
    let aa = MixedProfile::pure(&[2, 2], &[0, 0]);
    plans.push((catalog::unfair_split(), build_welfare_plan(&catalog::unfair_split(), &aa, &[4.0, 3.0], 1.0).unwrap()));
    let mut rng = sample::rng(31);
    for counts in [vec![2, 2], vec![3, 3], vec![2, 2, 2]] {
        let (g, s, t) = sample::full_support_instance(&mut rng, &counts, 0.5);
        let delta = 0.01 * g.utility_range();
        if let Ok(p) = build_improvement_plan(&g, &s, &t, delta) {
            plans.push((g, p));
        }
    }
    for (g, plan) in &plans {
        let r = check_on_path(g, plan).unwrap();
        if r.properties["punishment_within_ceiling"].status == Status::Pass {
            assert_eq!(r.properties["punishment_below_target"].status, Status::Pass);
        }
        assert!(r.passed, "{:?}", r.properties);
    }
}

#[test]
fn chosen_cap_verifies_and_is_recorded() {
    let g = catalog::rps_with_exit();
    let u3 = MixedProfile::uniform_on(&[4, 4], &[vec![0, 1, 2], vec![0, 1, 2]]);
    let req = PlanRequest::Improve { sigma: u3, target: vec![3, 3] };
    let choice = choose_delta(&g, &req, &VerifyOptions { budget: Some(8), ..VerifyOptions::default() }).unwrap();
    assert!(choice.report.accepted);
    assert_eq!(choice.tried.last(), Some(&(choice.delta, true)));
    assert_eq!(choice.rounds, choice.plan.num_rounds());
}

#[test]
fn two_by_two_plans_survive_every_grid_deviation() {
    let mut rng = sample::rng(1010);
    let mut built = 0;
    while built < 8 {
        let (g, sigma, t) = sample::full_support_instance(&mut rng, &[2, 2], 0.5);
        if commitment_games::equilibria::is_pure_nash(&g, &t, 0.0) {
            continue;
        }
        built += 1;
        let delta = (0.05 * g.utility_range()).min(0.5 * commitment_games::protocol::two_by_two_delta_bound(&g, &t));
        let plan = build_improvement_plan(&g, &sigma, &t, delta).unwrap();
        let rep = verify_plan(&g, &plan, &VerifyOptions::default()).unwrap();
        assert!(rep.accepted, "instance {built}: {:?}", rep.deviation_results.classes);
    }
}
