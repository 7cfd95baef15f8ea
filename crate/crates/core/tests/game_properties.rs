use commitment_games::commitment::validate_round;
use commitment_games::{CommitmentRound, Game, MixedProfile, Mode, Pledge, Recipient, SessionState, Vote};
use proptest::prelude::*;

fn game_strategy() -> impl Strategy<Value = Game> {
    prop::collection::vec(1usize..=3, 2..=3).prop_flat_map(|counts| {
        let len = counts.iter().product::<usize>() * counts.len();
        prop::collection::vec(-10.0f64..10.0, len).prop_map(move |u| Game::new(counts.clone(), u).unwrap())
    })
}

fn profile_in(counts: &[usize]) -> impl Strategy<Value = Vec<usize>> {
    counts.iter().map(|&c| 0..c).collect::<Vec<_>>()
}

fn mixed_in(counts: &[usize]) -> impl Strategy<Value = MixedProfile> {
    counts.iter().map(|&c| prop::collection::vec(0.01f64..1.0, c)).collect::<Vec<_>>().prop_map(|raw| {
        let probs = raw
            .into_iter()
            .map(|v| {
                let s: f64 = v.iter().sum();
                v.into_iter().map(|x| x / s).collect()
            })
            .collect();
        MixedProfile::new(probs).unwrap()
    })
}

/// Up to three pledges per round, each at most a third of the cap, so every
/// round respects the cap.
fn rounds_for(game: &Game, delta: f64, transfers: bool) -> impl Strategy<Value = Vec<CommitmentRound>> {
    let counts = game.action_counts().to_vec();
    let n = counts.len();
    let pledge = (0..n, profile_in(&counts), 0..n, 0.0..delta / 3.0, any::<bool>()).prop_map(move |(payer, outcome, r, x, burn)| {
        if burn || !transfers || r == payer {
            Pledge::burn(payer, outcome, x)
        } else {
            Pledge::transfer(payer, outcome, r, x)
        }
    });
    prop::collection::vec(prop::collection::vec(pledge, 0..=3).prop_map(CommitmentRound::new), 0..5)
}

/// Payoff tensor plus every pledge applied once.
fn folded(game: &Game, rounds: &[CommitmentRound]) -> Vec<f64> {
    let n = game.num_players();
    let mut u = game.utilities().to_vec();
    for p in rounds.iter().flat_map(|r| &r.pledges) {
        let idx = game.profile_index(&p.outcome) * n;
        u[idx + p.payer] -= p.amount;
        if let Recipient::Player(r) = p.recipient {
            u[idx + r] += p.amount;
        }
    }
    u
}

fn brute_expected(game: &Game, sigma: &MixedProfile, player: usize) -> f64 {
    game.profiles()
        .map(|a| {
            let w: f64 = a.iter().enumerate().map(|(j, &b)| sigma.prob(j, b)).product();
            w * game.utility(player, &a)
        })
        .sum()
}

proptest! {
    #[test]
    fn distance_is_a_metric(a in game_strategy(), noise in prop::collection::vec(-1.0f64..1.0, 54), noise2 in prop::collection::vec(-1.0f64..1.0, 54)) {
        let len = a.utilities().len();
        let b = a.perturbed(&noise.iter().cycle().take(len).copied().collect::<Vec<_>>()).unwrap();
        let c = b.perturbed(&noise2.iter().cycle().take(len).copied().collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(a.distance(&a), 0.0);
        prop_assert_eq!(a.distance(&b), b.distance(&a));
        prop_assert!(a.distance(&c) <= a.distance(&b) + b.distance(&c) + 1e-12);
    }

    #[test]
    fn transfers_conserve_welfare_and_burns_remove_it(
        (game, rounds) in game_strategy().prop_flat_map(|g| { let r = rounds_for(&g, 1.0, true); (Just(g), r) })
    ) {
        let mut g = game.clone();
        for r in &rounds {
            let next = g.apply_transfers(r).unwrap();
            for a in g.profiles() {
                let burned: f64 = r.pledges.iter().filter(|p| p.outcome == a && p.recipient == Recipient::Burn).map(|p| p.amount).sum();
                prop_assert!((next.welfare_at(&a) - (g.welfare_at(&a) - burned)).abs() <= 1e-12);
            }
            g = next;
        }
    }

    #[test]
    fn rounds_fold_into_one_tensor(
        (game, rounds) in game_strategy().prop_flat_map(|g| { let r = rounds_for(&g, 0.5, true); (Just(g), r) })
    ) {
        let mut s = SessionState::open(game.clone(), 0.5, Mode::Transfers).unwrap();
        let n = game.num_players();
        for r in &rounds {
            s = s.submit_round(r.clone()).unwrap().cast_votes(vec![Vote::Continue; n]).unwrap();
        }
        let expect = folded(&game, &rounds);
        for (x, y) in s.current_game().utilities().iter().zip(&expect) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn accepted_rounds_respect_the_cap(
        (game, rounds) in game_strategy().prop_flat_map(|g| { let r = rounds_for(&g, 0.3, true); (Just(g), r) })
    ) {
        for r in &rounds {
            prop_assert!(validate_round(&game, 0.3, Mode::Transfers, r).is_ok());
            for payer in 0..game.num_players() {
                let own = CommitmentRound::new(r.pledges_of(payer).cloned().collect());
                let next = game.apply_transfers(&own).unwrap();
                prop_assert!(game.distance(&next) <= 2.0 * 0.3 + 1e-12);
                for a in game.profiles() {
                    prop_assert!(game.utility(payer, &a) - next.utility(payer, &a) <= 0.3 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn burn_mode_rejects_transfers(game in game_strategy()) {
        let n = game.num_players();
        let a = vec![0; n];
        let r = CommitmentRound::new(vec![Pledge::transfer(0, a, 1, 0.1)]);
        prop_assert!(validate_round(&game, 1.0, Mode::BurnOnly, &r).is_err());
    }

    #[test]
    fn welfare_max_matches_scan(game in game_strategy()) {
        let (w, at) = game.welfare_max();
        let best = game.profiles().map(|a| game.welfare_at(&a)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(w, best);
        let first = game.profiles().find(|a| game.welfare_at(a) == best).unwrap();
        prop_assert_eq!(at, first);
    }

    #[test]
    fn expected_utility_matches_brute_force(
        (game, sigma) in game_strategy().prop_flat_map(|g| { let s = mixed_in(g.action_counts()); (Just(g), s) })
    ) {
        for i in 0..game.num_players() {
            let fast = game.expected_utility(&sigma, i).unwrap();
            prop_assert!((fast - brute_expected(&game, &sigma, i)).abs() <= 1e-10);
        }
        let total: f64 = (0..game.num_players()).map(|i| brute_expected(&game, &sigma, i)).sum();
        prop_assert!((game.social_welfare(&sigma).unwrap() - total).abs() <= 1e-10);
    }

    #[test]
    fn pure_profiles_pay_their_entry(
        (game, a) in game_strategy().prop_flat_map(|g| { let p = profile_in(g.action_counts()); (Just(g), p) })
    ) {
        let pure = MixedProfile::pure(game.action_counts(), &a);
        for i in 0..game.num_players() {
            prop_assert_eq!(game.expected_utility(&pure, i).unwrap(), game.utility(i, &a));
        }
    }
}

#[test]
fn replay_reproduces_a_session() {
    let g = commitment_games::catalog::prisoners_dilemma();
    let s = SessionState::open(g.clone(), 1.0, Mode::Transfers)
        .unwrap()
        .submit_round(CommitmentRound::new(vec![Pledge::transfer(0, vec![0, 0], 1, 1.0), Pledge::transfer(1, vec![0, 0], 0, 1.0)]))
        .unwrap()
        .cast_votes(vec![Vote::Stop, Vote::Stop])
        .unwrap()
        .play_terminal(vec![0, 0])
        .unwrap();
    let t = s.transcript().clone();
    let again = SessionState::replay(g, &t).unwrap();
    assert_eq!(again.transcript(), &t);
}
