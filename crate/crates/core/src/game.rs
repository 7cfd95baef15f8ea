//! Finite normal-form games, mixed profiles and the utility algebra on them.
//!
//! Utilities live in a dense row-major tensor: pure profiles are ordered
//! lexicographically (the last player's action varies fastest) and each
//! profile stores one payoff per player. All indices are 0-based here; file
//! formats convert to and from 1-based labels.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commitment::{CommitmentRound, Recipient};
use crate::error::{Error, Result};
use crate::tol::{EQ_TOL, SUPPORT_EPS};

#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    action_counts: Vec<usize>,
    strides: Vec<usize>,
    utilities: Vec<f64>,
    action_names: Option<Vec<Vec<String>>>,
}

impl Game {
    /// Builds a game from per-player action counts and a flat payoff table
    /// indexed `[profile * n + player]`.
    pub fn new(action_counts: Vec<usize>, utilities: Vec<f64>) -> Result<Self> {
        let n = action_counts.len();
        if n < 2 {
            return Err(Error::Shape(format!("a game needs at least 2 players, got {n}")));
        }
        if let Some(i) = action_counts.iter().position(|&c| c == 0) {
            return Err(Error::Shape(format!("player {i} has no actions")));
        }
        let profiles: usize = action_counts.iter().product();
        if utilities.len() != profiles * n {
            return Err(Error::Shape(format!("expected {} payoffs ({profiles} profiles x {n} players), got {}", profiles * n, utilities.len())));
        }
        if let Some(pos) = utilities.iter().position(|u| !u.is_finite()) {
            return Err(Error::Shape(format!("payoff #{pos} is not finite")));
        }
        let strides = strides_for(&action_counts);
        Ok(Self { action_counts, strides, utilities, action_names: None })
    }

    /// Builds a game by evaluating `f(profile, player)` on every pure profile.
    pub fn from_fn(action_counts: Vec<usize>, mut f: impl FnMut(&[usize], usize) -> f64) -> Result<Self> {
        let n = action_counts.len();
        let mut utilities = Vec::with_capacity(action_counts.iter().product::<usize>() * n);
        for profile in ProfileIter::new(&action_counts) {
            for player in 0..n {
                utilities.push(f(&profile, player));
            }
        }
        Self::new(action_counts, utilities)
    }

    /// Two-player game from a table of `(row payoff, column payoff)` cells.
    pub fn bimatrix(cells: &[Vec<(f64, f64)>]) -> Result<Self> {
        let rows = cells.len();
        let cols = cells.first().map_or(0, Vec::len);
        if cells.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged bimatrix".into()));
        }
        let utilities = cells.iter().flatten().flat_map(|&(a, b)| [a, b]).collect();
        Self::new(vec![rows, cols], utilities)
    }

    pub fn with_action_names(mut self, names: Vec<Vec<String>>) -> Result<Self> {
        if names.len() != self.num_players() || names.iter().zip(&self.action_counts).any(|(n, &c)| n.len() != c) {
            return Err(Error::Shape("action names do not match action counts".into()));
        }
        self.action_names = Some(names);
        Ok(self)
    }

    pub fn action_names(&self) -> Option<&[Vec<String>]> {
        self.action_names.as_deref()
    }

    /// Display label of an action (its name, or its 1-based index).
    pub fn action_label(&self, player: usize, action: usize) -> String {
        match &self.action_names {
            Some(names) => names[player][action].clone(),
            None => format!("{}", action + 1),
        }
    }

    pub fn profile_label(&self, profile: &[usize]) -> String {
        let parts: Vec<String> = profile.iter().enumerate().map(|(i, &a)| self.action_label(i, a)).collect();
        format!("({})", parts.join(","))
    }

    pub fn num_players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn num_profiles(&self) -> usize {
        self.utilities.len() / self.num_players()
    }

    pub fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    pub fn profile_index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn profile_at(&self, mut index: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|&s| {
                let a = index / s;
                index %= s;
                a
            })
            .collect()
    }

    pub fn profiles(&self) -> ProfileIter {
        ProfileIter::new(&self.action_counts)
    }

    pub fn check_profile(&self, profile: &[usize]) -> Result<()> {
        if profile.len() != self.num_players() {
            return Err(Error::Shape(format!("profile has {} entries, game has {} players", profile.len(), self.num_players())));
        }
        for (i, (&a, &c)) in profile.iter().zip(&self.action_counts).enumerate() {
            if a >= c {
                return Err(Error::Shape(format!("player {i} has no action {a}")));
            }
        }
        Ok(())
    }

    pub fn utility(&self, player: usize, profile: &[usize]) -> f64 {
        self.utilities[self.profile_index(profile) * self.num_players() + player]
    }

    pub fn payoffs(&self, profile: &[usize]) -> &[f64] {
        let n = self.num_players();
        let base = self.profile_index(profile) * n;
        &self.utilities[base..base + n]
    }

    pub(crate) fn add_utility(&mut self, player: usize, profile: &[usize], amount: f64) {
        let n = self.num_players();
        let idx = self.profile_index(profile) * n + player;
        self.utilities[idx] += amount;
    }

    /// Smallest and largest payoff over all players and profiles.
    pub fn utility_bounds(&self) -> (f64, f64) {
        self.utilities.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &u| (lo.min(u), hi.max(u)))
    }

    pub fn utility_range(&self) -> f64 {
        let (lo, hi) = self.utility_bounds();
        hi - lo
    }

    /// `u_i(a, sigma_{-i})` for every action `a` of `player`.
    pub fn deviation_payoffs(&self, profile: &MixedProfile, player: usize) -> Result<Vec<f64>> {
        profile.check_shape(self)?;
        let n = self.num_players();
        let mut out = vec![0.0; self.action_counts[player]];
        for (idx, a) in self.profiles().enumerate() {
            let mut w = 1.0;
            for (j, &aj) in a.iter().enumerate() {
                if j != player {
                    w *= profile.probs[j][aj];
                }
            }
            if w != 0.0 {
                out[a[player]] += w * self.utilities[idx * n + player];
            }
        }
        Ok(out)
    }

    /// `sum_a u_i(a) * prod_j sigma_j(a_j)`.
    pub fn expected_utility(&self, profile: &MixedProfile, player: usize) -> Result<f64> {
        if player >= self.num_players() {
            return Err(Error::Shape(format!("no player {player}")));
        }
        Ok(self.expected_utilities(profile)?[player])
    }

    pub fn expected_utilities(&self, profile: &MixedProfile) -> Result<Vec<f64>> {
        profile.check_shape(self)?;
        let n = self.num_players();
        let mut out = vec![0.0; n];
        for (idx, a) in self.profiles().enumerate() {
            let w: f64 = a.iter().enumerate().map(|(j, &aj)| profile.probs[j][aj]).product();
            if w != 0.0 {
                for (i, o) in out.iter_mut().enumerate() {
                    *o += w * self.utilities[idx * n + i];
                }
            }
        }
        Ok(out)
    }

    pub fn social_welfare(&self, profile: &MixedProfile) -> Result<f64> {
        Ok(self.expected_utilities(profile)?.iter().sum())
    }

    pub fn welfare_at(&self, profile: &[usize]) -> f64 {
        self.payoffs(profile).iter().sum()
    }

    /// Maximum social welfare over pure profiles and the lexicographically
    /// smallest profile attaining it.
    pub fn welfare_max(&self) -> (f64, Vec<usize>) {
        let n = self.num_players();
        let mut best = (f64::NEG_INFINITY, 0);
        for idx in 0..self.num_profiles() {
            let w: f64 = self.utilities[idx * n..(idx + 1) * n].iter().sum();
            if w > best.0 {
                best = (w, idx);
            }
        }
        (best.0, self.profile_at(best.1))
    }

    /// Game-space metric: `+inf` across different structures, otherwise the
    /// largest single-entry payoff difference.
    pub fn distance(&self, other: &Game) -> f64 {
        if self.action_counts != other.action_counts {
            return f64::INFINITY;
        }
        self.utilities.iter().zip(&other.utilities).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Applies every pledge of `round`: payers lose the amount at the pledged
    /// outcome, player recipients gain it, burned amounts vanish.
    ///
    /// Only sign and index legality are checked here; the per-round cap is a
    /// session property (see [`crate::commitment::validate_round`]).
    pub fn apply_transfers(&self, round: &CommitmentRound) -> Result<Game> {
        let mut next = self.clone();
        for pledge in &round.pledges {
            pledge.check_against(self)?;
            next.add_utility(pledge.payer, &pledge.outcome, -pledge.amount);
            if let Recipient::Player(r) = pledge.recipient {
                next.add_utility(r, &pledge.outcome, pledge.amount);
            }
        }
        Ok(next)
    }

    /// Whether `target` strictly improves every player's payoff over
    /// `baseline`, together with the margin `min_i (u_i(target) - u_i(baseline))`.
    pub fn pareto_improves(&self, target: &[usize], baseline: &MixedProfile) -> Result<ParetoCheck> {
        self.check_profile(target)?;
        let base = self.expected_utilities(baseline)?;
        let margin = self.payoffs(target).iter().zip(&base).map(|(t, b)| t - b).fold(f64::INFINITY, f64::min);
        Ok(ParetoCheck { improves: margin > EQ_TOL, margin })
    }

    /// Relabels actions: `perms[i][new] = old` for each player.
    pub fn permute_actions(&self, perms: &[Vec<usize>]) -> Game {
        let counts = self.action_counts.clone();
        let mut g = Game::from_fn(counts, |profile, player| {
            let old: Vec<usize> = profile.iter().enumerate().map(|(i, &a)| perms[i][a]).collect();
            self.utility(player, &old)
        })
        .expect("permutation preserves shape");
        if let Some(names) = &self.action_names {
            let renamed = perms.iter().enumerate().map(|(i, p)| p.iter().map(|&old| names[i][old].clone()).collect()).collect();
            g.action_names = Some(renamed);
        }
        g
    }

    /// Adds `delta[k]` to the k-th entry of the flat payoff table.
    pub fn perturbed(&self, delta: &[f64]) -> Result<Game> {
        if delta.len() != self.utilities.len() {
            return Err(Error::Shape("perturbation length mismatch".into()));
        }
        let mut g = self.clone();
        for (u, d) in g.utilities.iter_mut().zip(delta) {
            *u += d;
        }
        Ok(g)
    }

    /// SHA-256 over the structure and the exact bit patterns of all payoffs.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.num_players() as u64).to_le_bytes());
        for &c in &self.action_counts {
            h.update((c as u64).to_le_bytes());
        }
        for u in &self.utilities {
            h.update(u.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoCheck {
    pub improves: bool,
    pub margin: f64,
}

fn strides_for(counts: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; counts.len()];
    for i in (0..counts.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * counts[i + 1];
    }
    strides
}

/// Lexicographic iterator over pure profiles.
#[derive(Debug, Clone)]
pub struct ProfileIter {
    counts: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl ProfileIter {
    pub fn new(counts: &[usize]) -> Self {
        let next = if counts.iter().all(|&c| c > 0) { Some(vec![0; counts.len()]) } else { None };
        Self { counts: counts.to_vec(), next }
    }
}

impl Iterator for ProfileIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for i in (0..succ.len()).rev() {
            succ[i] += 1;
            if succ[i] < self.counts[i] {
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(current)
    }
}

/// Lexicographic iterator over the product of explicit per-coordinate lists.
pub(crate) fn product_of(lists: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let counts: Vec<usize> = lists.iter().map(Vec::len).collect();
    ProfileIter::new(&counts).map(|pos| pos.iter().enumerate().map(|(j, &p)| lists[j][p]).collect()).collect()
}

/// Per-player probability vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile {
    probs: Vec<Vec<f64>>,
}

impl MixedProfile {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        for (i, p) in probs.iter().enumerate() {
            if p.is_empty() {
                return Err(Error::InvalidProfile(format!("player {i} has no actions")));
            }
            if let Some(x) = p.iter().find(|x| !(0.0..=1.0).contains(*x) || !x.is_finite()) {
                return Err(Error::InvalidProfile(format!("player {i} has probability {x}")));
            }
            let s: f64 = p.iter().sum();
            if (s - 1.0).abs() > EQ_TOL {
                return Err(Error::InvalidProfile(format!("player {i} probabilities sum to {s}")));
            }
        }
        Ok(Self { probs })
    }

    pub fn pure(action_counts: &[usize], profile: &[usize]) -> Self {
        let probs = action_counts
            .iter()
            .zip(profile)
            .map(|(&c, &a)| {
                let mut v = vec![0.0; c];
                v[a] = 1.0;
                v
            })
            .collect();
        Self { probs }
    }

    /// Uniform mixture over each player's listed actions.
    pub fn uniform_on(action_counts: &[usize], supports: &[Vec<usize>]) -> Self {
        let probs = action_counts
            .iter()
            .zip(supports)
            .map(|(&c, s)| {
                let mut v = vec![0.0; c];
                for &a in s {
                    v[a] = 1.0 / s.len() as f64;
                }
                v
            })
            .collect();
        Self { probs }
    }

    pub fn num_players(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn player(&self, i: usize) -> &[f64] {
        &self.probs[i]
    }

    pub fn prob(&self, player: usize, action: usize) -> f64 {
        self.probs[player][action]
    }

    pub fn support(&self, player: usize) -> Vec<usize> {
        self.probs[player].iter().enumerate().filter(|(_, &p)| p > SUPPORT_EPS).map(|(a, _)| a).collect()
    }

    pub fn supports(&self) -> Vec<Vec<usize>> {
        (0..self.num_players()).map(|i| self.support(i)).collect()
    }

    pub fn as_pure(&self) -> Option<Vec<usize>> {
        self.supports().into_iter().map(|s| if s.len() == 1 { Some(s[0]) } else { None }).collect()
    }

    pub fn has_full_support(&self) -> bool {
        self.probs.iter().enumerate().all(|(i, p)| self.support(i).len() == p.len())
    }

    /// Probability of the pure profile `a_{-i}` (all coordinates but `skip`).
    pub fn weight_excluding(&self, profile: &[usize], skip: &[usize]) -> f64 {
        profile.iter().enumerate().filter(|(j, _)| !skip.contains(j)).map(|(j, &a)| self.probs[j][a]).product()
    }

    pub fn check_shape(&self, game: &Game) -> Result<()> {
        let ok = self.probs.len() == game.num_players() && self.probs.iter().zip(game.action_counts()).all(|(p, &c)| p.len() == c);
        if ok {
            Ok(())
        } else {
            Err(Error::Shape("profile does not match the game's action sets".into()))
        }
    }

    /// Relabels with `perms[i][new] = old`.
    pub fn permute(&self, perms: &[Vec<usize>]) -> MixedProfile {
        let probs = perms.iter().enumerate().map(|(i, p)| p.iter().map(|&old| self.probs[i][old]).collect()).collect();
        MixedProfile { probs }
    }

    pub fn max_abs_diff(&self, other: &MixedProfile) -> f64 {
        self.probs.iter().flatten().zip(other.probs.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetRole {
    ParetoImprover,
    WelfareMaximizer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeTarget {
    pub profile: Vec<usize>,
    pub role: TargetRole,
}

impl OutcomeTarget {
    pub fn new(game: &Game, profile: Vec<usize>, role: TargetRole) -> Result<Self> {
        game.check_profile(&profile)?;
        Ok(Self { profile, role })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::commitment::Pledge;

    #[test]
    fn profile_indexing_is_lexicographic() {
        let g = Game::from_fn(vec![2, 3, 2], |_, _| 0.0).unwrap();
        let all: Vec<_> = g.profiles().collect();
        assert_eq!(all.len(), 12);
        assert_eq!(all[1], vec![0, 0, 1]);
        assert_eq!(all[2], vec![0, 1, 0]);
        for (i, p) in all.iter().enumerate() {
            assert_eq!(g.profile_index(p), i);
            assert_eq!(&g.profile_at(i), p);
        }
    }

    #[test]
    fn expected_utility_examples() {
        let rps = catalog::rps_with_exit();
        let sigma = MixedProfile::uniform_on(rps.action_counts(), &[vec![0, 1, 2], vec![0, 1, 2]]);
        assert!((rps.expected_utility(&sigma, 0).unwrap() - 3.0).abs() < 1e-12);

        let g = catalog::three_action_coordination();
        let half = MixedProfile::new(vec![vec![0.5, 0.5, 0.0]; 2]).unwrap();
        assert!((g.expected_utility(&half, 0).unwrap() - 3.0).abs() < 1e-12);

        for a in g.profiles() {
            let pure = MixedProfile::pure(g.action_counts(), &a);
            assert_eq!(g.expected_utility(&pure, 1).unwrap(), g.utility(1, &a));
        }
        assert!(matches!(rps.expected_utility(&half, 0), Err(Error::Shape(_))));
    }

    #[test]
    fn welfare_max_examples() {
        let (w, a) = catalog::unfair_split().welfare_max();
        assert_eq!((w, a), (7.0, vec![1, 1]));
        let (w, a) = catalog::chicken().welfare_max();
        assert_eq!((w, a), (3.0, vec![0, 1]));
        let single = Game::new(vec![1, 1], vec![2.0, 3.0]).unwrap();
        assert_eq!(single.welfare_max().0, 5.0);
    }

    #[test]
    fn welfare_max_breaks_ties_lexicographically() {
        let g = Game::bimatrix(&[vec![(1.0, 1.0), (2.0, 0.0)], vec![(0.0, 2.0), (1.0, 0.0)]]).unwrap();
        assert_eq!(g.welfare_max(), (2.0, vec![0, 0]));
    }

    #[test]
    fn distance_examples() {
        let (left, right) = (catalog::prisoners_dilemma(), catalog::prisoners_dilemma_after_pledges());
        assert_eq!(left.distance(&left), 0.0);
        assert_eq!(left.distance(&right), 1.0);
        assert_eq!(left.distance(&catalog::three_action_coordination()), f64::INFINITY);
    }

    #[test]
    fn transfers_reproduce_example_tables() {
        let (left, right) = (catalog::prisoners_dilemma(), catalog::prisoners_dilemma_after_pledges());
        let round = CommitmentRound::new(vec![
            Pledge::transfer(0, vec![0, 0], 1, 1.0),
            Pledge::transfer(0, vec![1, 0], 1, 1.0),
            Pledge::transfer(1, vec![0, 0], 0, 1.0),
            Pledge::transfer(1, vec![0, 1], 0, 1.0),
        ]);
        assert_eq!(left.apply_transfers(&round).unwrap(), right);
        assert_eq!(left.apply_transfers(&CommitmentRound::default()).unwrap(), left);

        let chicken = catalog::chicken();
        let round = CommitmentRound::new(vec![Pledge::transfer(0, vec![0, 1], 1, 20.0)]);
        let after = chicken.apply_transfers(&round).unwrap();
        assert_eq!(after.payoffs(&[0, 1]), &[-19.0, 22.0]);
    }

    #[test]
    fn transfers_reject_negative_and_self_pledges() {
        let g = catalog::unfair_split();
        let neg = CommitmentRound::new(vec![Pledge::burn(0, vec![0, 0], -1.0)]);
        assert!(g.apply_transfers(&neg).is_err());
        let selfp = CommitmentRound::new(vec![Pledge::transfer(0, vec![0, 0], 0, 1.0)]);
        assert!(g.apply_transfers(&selfp).is_err());
    }

    #[test]
    fn pareto_examples() {
        let rps = catalog::rps_with_exit();
        let sigma = MixedProfile::uniform_on(rps.action_counts(), &[vec![0, 1, 2], vec![0, 1, 2]]);
        let c = rps.pareto_improves(&[3, 3], &sigma).unwrap();
        assert!(c.improves);
        assert!((c.margin - 1.0).abs() < 1e-12);

        let constant = Game::from_fn(vec![2, 2], |_, _| 1.0).unwrap();
        let s = MixedProfile::pure(&[2, 2], &[0, 0]);
        assert!(!constant.pareto_improves(&[1, 1], &s).unwrap().improves);

        let split = catalog::unfair_split();
        let round = CommitmentRound::new(vec![Pledge::transfer(0, vec![1, 1], 1, 6.0)]);
        let moved = split.apply_transfers(&round).unwrap();
        let aa = MixedProfile::pure(&[2, 2], &[0, 0]);
        let c = moved.pareto_improves(&[1, 1], &aa).unwrap();
        assert!(c.improves);
        assert_eq!(c.margin, 3.0);
    }

    #[test]
    fn permutation_round_trips() {
        let g = catalog::rps_with_exit();
        let perms = vec![vec![3, 0, 1, 2], vec![1, 2, 3, 0]];
        let p = g.permute_actions(&perms);
        assert_eq!(p.payoffs(&[0, 3]), g.payoffs(&[3, 0]));
        let mut inv = vec![vec![0; 4]; 2];
        for i in 0..2 {
            for (new, &old) in perms[i].iter().enumerate() {
                inv[i][old] = new;
            }
        }
        assert_eq!(p.permute_actions(&inv), g);
    }

    #[test]
    fn hash_tracks_exact_bits() {
        let g = catalog::unfair_split();
        let h = g.content_hash();
        assert_eq!(h, g.clone().content_hash());
        let g2 = g.perturbed(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1e-15]).unwrap();
        assert_ne!(h, g2.content_hash());
    }
}
