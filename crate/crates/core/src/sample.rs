//! Seeded random instances for property tests, benchmarks and the
//! acceptance corpus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibria::is_non_degenerate;
use crate::game::{Game, MixedProfile};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Payoffs drawn uniformly from `[-scale, scale]`.
pub fn random_game(rng: &mut impl Rng, action_counts: &[usize], scale: f64) -> Game {
    Game::from_fn(action_counts.to_vec(), |_, _| rng.random_range(-scale..=scale)).expect("valid shape")
}

/// Payoffs drawn from a small integer range, so that ties are common.
pub fn random_integer_game(rng: &mut impl Rng, action_counts: &[usize], max: i32) -> Game {
    Game::from_fn(action_counts.to_vec(), |_, _| rng.random_range(-max..=max) as f64).expect("valid shape")
}

/// Probability vector with every entry at least `floor / len`.
pub fn random_distribution(rng: &mut impl Rng, len: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..1.0) + floor).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

pub fn random_full_support(rng: &mut impl Rng, action_counts: &[usize]) -> MixedProfile {
    let probs = action_counts.iter().map(|&c| random_distribution(rng, c, 0.3)).collect();
    MixedProfile::new(probs).expect("normalized")
}

/// Shifts each player's payoffs by a per-action constant so that every action
/// in `sigma`'s support earns the same expected payoff against `sigma`, and
/// every unsupported action earns `gap` less. Afterwards `sigma` is an
/// equilibrium.
pub fn make_equilibrium(game: &Game, sigma: &MixedProfile, gap: f64) -> Game {
    let n = game.num_players();
    let shifts: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let dev = game.deviation_payoffs(sigma, i).expect("shape");
            let support = sigma.support(i);
            let level = support.iter().map(|&a| dev[a]).sum::<f64>() / support.len() as f64;
            dev.iter().enumerate().map(|(a, &d)| if support.contains(&a) { level - d } else { level - gap - d }).collect()
        })
        .collect();
    Game::from_fn(game.action_counts().to_vec(), |a, i| game.utility(i, a) + shifts[i][a[i]]).expect("shape")
}

/// Raises every player's payoff at `target` by `bonus` while keeping `sigma`
/// an equilibrium with unchanged expected payoffs.
pub fn add_target_bonus(game: &Game, sigma: &MixedProfile, target: &[usize], bonus: f64) -> Game {
    let n = game.num_players();
    let w: Vec<f64> = (0..n).map(|i| sigma.weight_excluding(target, &[i])).collect();
    Game::from_fn(game.action_counts().to_vec(), |a, i| {
        let mut u = game.utility(i, a);
        if a == target {
            u += bonus;
        }
        if a[i] == target[i] {
            u -= bonus * w[i];
        }
        u
    })
    .expect("shape")
}

/// A random game with a non-degenerate full-support equilibrium `sigma` and a
/// target outcome (all first actions) improving on it by at least `margin`.
pub fn full_support_instance(rng: &mut impl Rng, action_counts: &[usize], margin: f64) -> (Game, MixedProfile, Vec<usize>) {
    let target = vec![0; action_counts.len()];
    loop {
        let sigma = random_full_support(rng, action_counts);
        let base = make_equilibrium(&random_game(rng, action_counts, 5.0), &sigma, 0.0);
        let eu = base.expected_utilities(&sigma).expect("shape");
        let need = (0..action_counts.len())
            .map(|i| {
                let w = sigma.weight_excluding(&target, &[i]);
                (eu[i] + margin - base.utility(i, &target)) / (1.0 - w)
            })
            .fold(0.0, f64::max);
        let game = add_target_bonus(&base, &sigma, &target, need + rng.random_range(0.0..1.0));
        let ok = is_non_degenerate(&game, &sigma).map(|r| r.non_degenerate).unwrap_or(false);
        if ok && game.pareto_improves(&target, &sigma).map(|c| c.margin >= margin - 1e-9).unwrap_or(false) {
            return (game, sigma, target);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::is_nash;

    #[test]
    fn constructed_instances_have_the_promised_properties() {
        let mut r = rng(11);
        for counts in [vec![2, 2], vec![3, 3], vec![2, 2, 2], vec![2, 3, 2]] {
            let (g, sigma, target) = full_support_instance(&mut r, &counts, 0.5);
            assert!(is_nash(&g, &sigma, 1e-9).unwrap().is_nash);
            assert!(is_non_degenerate(&g, &sigma).unwrap().non_degenerate);
            assert!(g.pareto_improves(&target, &sigma).unwrap().margin >= 0.5 - 1e-9);
        }
    }

    #[test]
    fn unsupported_actions_get_the_gap() {
        let mut r = rng(3);
        let g = random_game(&mut r, &[3, 3], 4.0);
        let sigma = MixedProfile::new(vec![vec![0.5, 0.5, 0.0], vec![0.2, 0.8, 0.0]]).unwrap();
        let eq = make_equilibrium(&g, &sigma, 0.7);
        let rep = is_non_degenerate(&eq, &sigma).unwrap();
        assert!((rep.min_residual - 0.7).abs() < 1e-9);
    }
}
