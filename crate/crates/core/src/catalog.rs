//! Small named games used throughout the docs, tests and the CLI corpus.

use crate::game::Game;

fn named(cells: &[&[(f64, f64)]], rows: &[&str], cols: &[&str]) -> Game {
    let cells: Vec<Vec<(f64, f64)>> = cells.iter().map(|r| r.to_vec()).collect();
    let names = vec![rows.iter().map(|s| s.to_string()).collect(), cols.iter().map(|s| s.to_string()).collect()];
    Game::bimatrix(&cells).and_then(|g| g.with_action_names(names)).expect("catalog games are well formed")
}

/// Prisoner's dilemma; (D,D) is the only equilibrium.
pub fn prisoners_dilemma() -> Game {
    named(&[&[(0.0, 0.0), (-2.0, 1.0)], &[(1.0, -2.0), (-1.0, -1.0)]], &["C", "D"], &["C", "D"])
}

/// The prisoner's dilemma after each player promises 1 to the other
/// whenever the other cooperates.
pub fn prisoners_dilemma_after_pledges() -> Game {
    named(&[&[(0.0, 0.0), (-1.0, 0.0)], &[(0.0, -1.0), (-1.0, -1.0)]], &["C", "D"], &["C", "D"])
}

/// Asymmetric chicken.
pub fn chicken() -> Game {
    named(&[&[(0.0, 0.0), (1.0, 2.0)], &[(2.0, 0.0), (-10.0, -10.0)]], &["Swerve", "Straight"], &["Swerve", "Straight"])
}

/// (A,A) is the unique equilibrium while (B,B) carries all the welfare,
/// lopsidedly in favour of the row player.
pub fn unfair_split() -> Game {
    named(&[&[(0.0, 0.0), (-2.0, -2.0)], &[(-2.0, -2.0), (10.0, -3.0)]], &["A", "B"], &["A", "B"])
}

/// 3x3 coordination game with a non-degenerate half/half equilibrium on the
/// first two actions.
pub fn three_action_coordination() -> Game {
    named(
        &[&[(5.0, 5.0), (1.0, 1.0), (1.0, 0.0)], &[(1.0, 1.0), (5.0, 5.0), (0.0, 1.0)], &[(0.0, 1.0), (1.0, 0.0), (2.0, 2.0)]],
        &["a1", "a2", "a3"],
        &["a1", "a2", "a3"],
    )
}

/// A game whose pure equilibrium (A,A) can be destroyed by a single capped
/// commitment round, steering play to (B,B).
pub fn first_mover_trap() -> Game {
    named(
        &[&[(5.0, 5.0), (0.0, 5.0), (0.0, 0.0)], &[(5.0, 0.0), (9.0, 2.0), (7.0, 1.0)], &[(0.0, 0.0), (1.0, 7.0), (6.0, 6.0)]],
        &["A", "B", "C"],
        &["A", "B", "C"],
    )
}

/// Three players with two actions each. Uniform play is a full-support
/// equilibrium paying 1.5 to everyone; all playing the first action pays 5
/// each but every player would rather switch there.
pub fn three_player_full_support() -> Game {
    // own-action incentive against the opponents' actions (lexicographic)
    let incentive = [-1.0, 2.0, 2.0, -3.0];
    let game = Game::from_fn(vec![2, 2, 2], |a, i| {
        let others: Vec<usize> = (0..3).filter(|&j| j != i).map(|j| a[j]).collect();
        let second = if others == [0, 0] { 6.0 } else { 0.0 };
        if a[i] == 1 {
            second
        } else {
            second + incentive[2 * others[0] + others[1]]
        }
    })
    .expect("catalog games are well formed");
    let names = vec![vec!["L".to_string(), "R".to_string()]; 3];
    game.with_action_names(names).expect("catalog games are well formed")
}

/// Rock-paper-scissors on the first three actions plus a fourth "exit"
/// action; (a4,a4) Pareto-improves the uniform equilibrium.
pub fn rps_with_exit() -> Game {
    named(
        &[
            &[(2.0, 2.0), (5.0, 2.0), (2.0, 5.0), (6.0, 0.0)],
            &[(2.0, 5.0), (2.0, 2.0), (5.0, 2.0), (0.0, 0.0)],
            &[(5.0, 2.0), (2.0, 5.0), (2.0, 2.0), (0.0, 0.0)],
            &[(0.0, 6.0), (0.0, 0.0), (0.0, 0.0), (4.0, 4.0)],
        ],
        &["a1", "a2", "a3", "a4"],
        &["a1", "a2", "a3", "a4"],
    )
}

/// Variant of [`rps_with_exit`] where the improving outcome (a4,a3) shares an
/// action with the equilibrium support.
pub fn rps_with_exit_variant() -> Game {
    named(
        &[
            &[(2.0, 2.0), (5.0, 2.0), (2.0, 5.0), (2.0, 2.0)],
            &[(2.0, 5.0), (2.0, 2.0), (5.0, 2.0), (0.0, 0.0)],
            &[(5.0, 2.0), (2.0, 5.0), (2.0, 2.0), (1.0, 1.0)],
            &[(2.0, 2.0), (2.5, 2.0), (4.0, 4.0), (0.0, 0.0)],
        ],
        &["a1", "a2", "a3", "a4"],
        &["a1", "a2", "a3", "a4"],
    )
}
