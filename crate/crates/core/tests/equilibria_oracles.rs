use commitment_games::equilibria::{
    build_characteristic_system, enumerate_pure_nash, is_nash, is_non_degenerate, probe_strong_punishability, solve_on_support, SolveOutcome,
};
use commitment_games::{catalog, sample, Execution, Game, MixedProfile};
use rand::Rng;

/// Every profile where no player gains by a unilateral switch.
fn scan_pure_nash(game: &Game) -> Vec<Vec<usize>> {
    game.profiles()
        .filter(|a| {
            (0..game.num_players()).all(|i| {
                (0..game.action_counts()[i]).all(|b| {
                    let mut d = a.clone();
                    d[i] = b;
                    game.utility(i, &d) <= game.utility(i, a)
                })
            })
        })
        .collect()
}

#[test]
fn pure_nash_matches_definitional_scan() {
    let mut rng = sample::rng(1001);
    for k in 0..500 {
        let n = rng.random_range(2..=3);
        let counts: Vec<usize> = (0..n).map(|_| rng.random_range(1..=4)).collect();
        // integer payoffs make ties (and weak equilibria) common
        let g = if k % 2 == 0 { sample::random_integer_game(&mut rng, &counts, 3) } else { sample::random_game(&mut rng, &counts, 5.0) };
        let fast = enumerate_pure_nash(&g);
        assert_eq!(fast, scan_pure_nash(&g), "game {k}: {counts:?}");
        for a in g.profiles() {
            let pure = MixedProfile::pure(&counts, &a);
            assert_eq!(is_nash(&g, &pure, 0.0).unwrap().is_nash, fast.contains(&a));
        }
    }
}

fn random_support(rng: &mut impl Rng, count: usize) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..count).filter(|_| rng.random_bool(0.6)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = sample::rng(77);
    let h = 1e-6;
    for k in 0..100 {
        let n = rng.random_range(2..=4);
        let counts: Vec<usize> = (0..n).map(|_| rng.random_range(2..=3)).collect();
        let g = sample::random_game(&mut rng, &counts, 5.0);
        let supports: Vec<Vec<usize>> = counts.iter().map(|&c| random_support(&mut rng, c)).collect();
        let sys = build_characteristic_system(&g, &supports).unwrap();
        let x: Vec<f64> = (0..sys.num_vars()).map(|_| rng.random_range(0.05..1.0)).collect();
        let jac = sys.jacobian(&x);
        for c in 0..x.len() {
            let mut up = x.clone();
            let mut down = x.clone();
            up[c] += h;
            down[c] -= h;
            let (fu, fd) = (sys.defect(&up), sys.defect(&down));
            for r in 0..fu.len() {
                let fdiff = (fu[r] - fd[r]) / (2.0 * h);
                assert!((fdiff - jac[(r, c)]).abs() <= 1e-5, "system {k} entry ({r},{c}): {fdiff} vs {}", jac[(r, c)]);
            }
        }
    }
}

#[test]
fn two_player_jacobian_factors_into_blocks() {
    let mut rng = sample::rng(5150);
    for m in [2, 3, 4] {
        for _ in 0..10 {
            let g = sample::random_game(&mut rng, &[m, m], 5.0);
            let full = vec![(0..m).collect::<Vec<_>>(); 2];
            let sys = build_characteristic_system(&g, &full).unwrap();
            let x = vec![0.5; 2 * m];
            let d = sys.jacobian(&x).determinant();
            let blocks = sys.incentive_block(0).unwrap().determinant() * sys.incentive_block(1).unwrap().determinant();
            assert!((d.abs() - blocks.abs()).abs() <= 1e-9 * d.abs().max(1.0), "{d} vs {blocks}");
        }
    }
}

#[test]
fn constructed_equilibria_are_recovered() {
    let mut rng = sample::rng(8);
    for counts in [vec![2, 2], vec![3, 3], vec![2, 2, 2], vec![2, 3, 2]] {
        for _ in 0..5 {
            let (g, sigma, _) = sample::full_support_instance(&mut rng, &counts, 0.5);
            // Newton is local: start near the equilibrium, as after a small perturbation
            let uniform = MixedProfile::uniform_on(&counts, &sigma.supports());
            let seed = MixedProfile::new(
                sigma.probs().iter().zip(uniform.probs()).map(|(s, u)| s.iter().zip(u).map(|(a, b)| 0.9 * a + 0.1 * b).collect()).collect(),
            )
            .unwrap();
            match solve_on_support(&g, &sigma.supports(), Some(&seed)).unwrap() {
                SolveOutcome::Solved(p) => assert!(p.max_abs_diff(&sigma) < 1e-8, "{counts:?}"),
                other => panic!("{counts:?}: {other:?}"),
            }
            assert!(is_non_degenerate(&g, &sigma).unwrap().non_degenerate);
        }
    }
}

#[test]
fn probe_is_deterministic_and_policy_independent() {
    let g = catalog::three_action_coordination();
    let half = MixedProfile::uniform_on(&[3, 3], &[vec![0, 1], vec![0, 1]]);
    let a = probe_strong_punishability(&g, &half, 1.0, 0.05, 40, 9, Execution::Sequential).unwrap();
    let b = probe_strong_punishability(&g, &half, 1.0, 0.05, 40, 9, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    assert!(a.failures.is_empty());
    let c = probe_strong_punishability(&g, &half, 1.0, 0.05, 40, 10, Execution::Parallel).unwrap();
    assert_ne!(a.worst_excess, c.worst_excess);
}
