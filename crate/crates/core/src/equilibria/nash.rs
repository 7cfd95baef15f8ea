use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::{Game, MixedProfile};

/// A profitable unilateral deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub player: usize,
    pub action: usize,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NashCheck {
    pub is_nash: bool,
    /// Largest deviation gain over all players and pure actions.
    pub worst: Option<Deviation>,
}

/// Best-response check: no player gains more than `tol` by switching to any
/// pure action.
pub fn is_nash(game: &Game, profile: &MixedProfile, tol: f64) -> Result<NashCheck> {
    let mut worst: Option<Deviation> = None;
    for player in 0..game.num_players() {
        let dev = game.deviation_payoffs(profile, player)?;
        let value: f64 = dev.iter().zip(profile.player(player)).map(|(u, p)| u * p).sum();
        for (action, &u) in dev.iter().enumerate() {
            let gain = u - value;
            if worst.is_none_or(|w| gain > w.gain) {
                worst = Some(Deviation { player, action, gain });
            }
        }
    }
    let is_nash = worst.is_none_or(|w| w.gain <= tol);
    Ok(NashCheck { is_nash, worst: worst.filter(|w| w.gain > tol) })
}

/// Whether no player strictly gains by a unilateral pure deviation from `profile`.
pub fn is_pure_nash(game: &Game, profile: &[usize], tol: f64) -> bool {
    let mut dev = profile.to_vec();
    for (i, &a) in profile.iter().enumerate() {
        let base = game.utility(i, profile);
        for alt in 0..game.action_counts()[i] {
            if alt == a {
                continue;
            }
            dev[i] = alt;
            let u = game.utility(i, &dev);
            dev[i] = a;
            if u > base + tol {
                return false;
            }
        }
    }
    true
}

/// All pure equilibria, in lexicographic order.
pub fn enumerate_pure_nash(game: &Game) -> Vec<Vec<usize>> {
    game.profiles().filter(|a| is_pure_nash(game, a, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::commitment::{CommitmentRound, Pledge};

    #[test]
    fn nash_examples() {
        let g = catalog::unfair_split();
        let aa = MixedProfile::pure(g.action_counts(), &[0, 0]);
        assert!(is_nash(&g, &aa, 1e-9).unwrap().is_nash);

        let chicken = catalog::chicken();
        let after = chicken.apply_transfers(&CommitmentRound::new(vec![Pledge::transfer(0, vec![0, 1], 1, 20.0)])).unwrap();
        let ss = MixedProfile::pure(&[2, 2], &[1, 0]);
        assert!(is_nash(&after, &ss, 1e-9).unwrap().is_nash);
        let sw = MixedProfile::pure(&[2, 2], &[0, 1]);
        let check = is_nash(&after, &sw, 1e-9).unwrap();
        assert!(!check.is_nash);
        let w = check.worst.unwrap();
        assert_eq!((w.player, w.action), (0, 1));
        assert_eq!(w.gain, 9.0);

        let coord = catalog::three_action_coordination();
        let half = MixedProfile::new(vec![vec![0.5, 0.5, 0.0]; 2]).unwrap();
        assert!(is_nash(&coord, &half, 1e-9).unwrap().is_nash);
    }

    #[test]
    fn pure_nash_examples() {
        assert_eq!(enumerate_pure_nash(&catalog::prisoners_dilemma()), vec![vec![1, 1]]);
        assert_eq!(enumerate_pure_nash(&catalog::chicken()), vec![vec![0, 1], vec![1, 0]]);
        let constant = Game::from_fn(vec![2, 3], |_, _| 4.0).unwrap();
        assert_eq!(enumerate_pure_nash(&constant).len(), 6);
    }
}
