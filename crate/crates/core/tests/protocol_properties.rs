use commitment_games::equilibria::{build_characteristic_system, is_nash, is_pure_nash, EquationKind};
use commitment_games::protocol::{build_improvement_plan, gradient_neutral_array, CaseTag, WelfarePath};
use commitment_games::{catalog, sample, Game, MixedProfile};
use proptest::prelude::*;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_neutral_shift_keeps_value_and_gradient(seed in any::<u64>(), n in 3usize..=4, lambda in -5.0f64..5.0) {
        let mut rng = sample::rng(seed);
        let counts = vec![2; n];
        let g = sample::random_game(&mut rng, &counts, 5.0);
        let sigma = sample::random_full_support(&mut rng, &counts);
        let sys = build_characteristic_system(&g, &sigma.supports()).unwrap();
        let x = sys.variables_of(&sigma);
        for eq in &sys.equations {
            let EquationKind::Indifference { player, .. } = eq.kind else { continue };
            let arr = gradient_neutral_array(&sigma, player);
            prop_assert!(arr[0] > 0.0);
            let shift: Vec<f64> = arr.iter().map(|v| lambda * v).collect();
            let moved = sys.shifted(eq, &shift);
            prop_assert!((moved.poly.eval(&x) - eq.poly.eval(&x)).abs() <= 1e-10);
            let d: Vec<f64> = moved.poly.gradient(&x).iter().zip(eq.poly.gradient(&x)).map(|(a, b)| a - b).collect();
            prop_assert!(inf_norm(&d) <= 1e-9);
        }
    }
}

#[test]
fn full_support_builders_keep_sigma_and_reach_the_target() {
    let mut rng = sample::rng(404);
    for counts in [vec![3, 3], vec![4, 4], vec![2, 2, 2], vec![3, 2, 2]] {
        let mut built = 0;
        while built < 4 {
            let (g, sigma, t) = sample::full_support_instance(&mut rng, &counts, 0.5);
            if is_pure_nash(&g, &t, 0.0) {
                continue;
            }
            built += 1;
            let plan = build_improvement_plan(&g, &sigma, &t, 0.05 * g.utility_range()).unwrap();
            let games = plan.prefix_games(&g).unwrap();
            for h in &games {
                assert!(is_nash(h, &sigma, 1e-9).unwrap().is_nash, "{counts:?}");
                assert_eq!(h.payoffs(&t), g.payoffs(&t));
            }
            assert!(is_pure_nash(games.last().unwrap(), &t, 0.0));
        }
    }
}

#[test]
fn halving_the_cap_at_most_doubles_the_rounds_plus_slack() {
    let u3 = MixedProfile::uniform_on(&[4, 4], &[vec![0, 1, 2], vec![0, 1, 2]]);
    let cases: Vec<(Game, MixedProfile, Vec<usize>)> = vec![
        (catalog::rps_with_exit(), u3.clone(), vec![3, 3]),
        (catalog::rps_with_exit_variant(), u3, vec![3, 2]),
        (catalog::prisoners_dilemma(), MixedProfile::pure(&[2, 2], &[1, 1]), vec![0, 0]),
    ];
    for (g, s, t) in cases {
        for delta in [0.2, 0.1, 0.05] {
            let a = build_improvement_plan(&g, &s, &t, delta).unwrap().num_rounds();
            let b = build_improvement_plan(&g, &s, &t, delta / 2.0).unwrap().num_rounds();
            assert!(b as f64 <= 2.5 * a as f64, "{a} -> {b}");
            assert!(b >= a);
        }
    }
}

#[test]
fn welfare_paths_hit_the_requested_payoffs() {
    let mut rng = sample::rng(99);
    let mut done = 0;
    while done < 20 {
        let counts = if done % 2 == 0 { vec![3, 3] } else { vec![2, 2, 2] };
        let (g, sigma, _) = sample::full_support_instance(&mut rng, &counts, 0.5);
        let (w, s) = g.welfare_max();
        let base = g.expected_utilities(&sigma).unwrap();
        let surplus = w - base.iter().sum::<f64>();
        if surplus <= 0.1 {
            continue;
        }
        done += 1;
        let x: Vec<f64> =
            base.iter().enumerate().map(|(i, u)| u + surplus * (i + 1) as f64 / (counts.len() * (counts.len() + 1) / 2) as f64).collect();
        let path = WelfarePath::new(&g, &sigma, &s, &x).unwrap();
        let end = path.at(1.0);
        for (i, xi) in x.iter().enumerate() {
            assert!((end.utility(i, &s) - xi).abs() <= 1e-9);
        }
        let mut prev = g.clone();
        for k in 0..=10 {
            let h = path.at(k as f64 / 10.0);
            for a in g.profiles() {
                assert!(h.welfare_at(&a) <= prev.welfare_at(&a) + 1e-9);
            }
            let hu = h.expected_utilities(&sigma).unwrap();
            for i in (0..counts.len()).filter(|&i| path.compensation[i].is_some()) {
                assert!((hu[i] - base[i]).abs() <= 1e-9);
            }
            prev = h;
        }
    }
}

#[test]
fn catalog_cases_are_classified() {
    let u3 = MixedProfile::uniform_on(&[4, 4], &[vec![0, 1, 2], vec![0, 1, 2]]);
    let p = build_improvement_plan(&catalog::rps_with_exit(), &u3, &[3, 3], 0.25).unwrap();
    assert_eq!(p.case_tag, CaseTag::PartialSupportDisjoint);
    let p = build_improvement_plan(&catalog::rps_with_exit_variant(), &u3, &[3, 2], 0.25).unwrap();
    assert_eq!(p.case_tag, CaseTag::PartialSupportMixed);
}
