//! The characteristic system of a support: normalization and indifference
//! equations whose common root is the equilibrium with that support, plus the
//! slack of every action outside it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game::{product_of, Game, MixedProfile};
use crate::poly::{Monomial, Polynomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationKind {
    /// Support probabilities of `player` sum to one.
    Normalization { player: usize },
    /// `player` is indifferent between its reference action and `action`.
    Indifference { player: usize, action: usize },
    /// `player` weakly prefers its reference action to the unsupported `action`.
    Residual { player: usize, action: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    pub kind: EquationKind,
    pub poly: Polynomial,
    pub rhs: f64,
    /// For indifference and residual rows: the opponents' supported profiles
    /// (lexicographic) with the payoff difference
    /// `u_i(ref, a_{-i}) - u_i(action, a_{-i})` attached to each.
    pub coefficients: Vec<(Vec<usize>, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicSystem {
    action_counts: Vec<usize>,
    supports: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    /// Normalization rows (one per player) followed by indifference rows,
    /// player by player.
    pub equations: Vec<Equation>,
    pub residuals: Vec<Equation>,
}

pub fn build_characteristic_system(game: &Game, supports: &[Vec<usize>]) -> Result<CharacteristicSystem> {
    CharacteristicSystem::new(game, supports)
}

impl CharacteristicSystem {
    pub fn new(game: &Game, supports: &[Vec<usize>]) -> Result<Self> {
        let n = game.num_players();
        if supports.len() != n {
            return Err(Error::Shape(format!("{} supports for {n} players", supports.len())));
        }
        for (i, s) in supports.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::EmptySupport { player: i });
            }
            if s.iter().any(|&a| a >= game.action_counts()[i]) {
                return Err(Error::Shape(format!("support of player {i} names a missing action")));
            }
            if s.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Shape(format!("support of player {i} must be strictly increasing")));
            }
        }
        let mut offsets = Vec::with_capacity(n);
        let mut acc = 0;
        for s in supports {
            offsets.push(acc);
            acc += s.len();
        }
        let var = |j: usize, a: usize| offsets[j] + supports[j].iter().position(|&b| b == a).expect("in support");

        let mut equations: Vec<Equation> = (0..n)
            .map(|i| Equation {
                kind: EquationKind::Normalization { player: i },
                poly: Polynomial::linear(supports[i].iter().map(|&a| (var(i, a), 1.0))),
                rhs: 1.0,
                coefficients: Vec::new(),
            })
            .collect();
        let mut residuals = Vec::new();

        for i in 0..n {
            let others: Vec<Vec<usize>> = (0..n).map(|j| if j == i { vec![0] } else { supports[j].clone() }).collect();
            let opponent_profiles = product_of(&others);
            let reference = supports[i][0];
            for action in 0..game.action_counts()[i] {
                if action == reference {
                    continue;
                }
                let mut coefficients = Vec::with_capacity(opponent_profiles.len());
                let mut monomials = Vec::with_capacity(opponent_profiles.len());
                for prof in &opponent_profiles {
                    let mut a = prof.clone();
                    a[i] = reference;
                    let u_ref = game.utility(i, &a);
                    a[i] = action;
                    let c = u_ref - game.utility(i, &a);
                    let vars = (0..n).filter(|&j| j != i).map(|j| var(j, prof[j])).collect();
                    let mut key = prof.clone();
                    key.remove(i);
                    coefficients.push((key, c));
                    monomials.push(Monomial { coeff: c, vars });
                }
                let in_support = supports[i].contains(&action);
                let eq = Equation {
                    kind: if in_support { EquationKind::Indifference { player: i, action } } else { EquationKind::Residual { player: i, action } },
                    poly: Polynomial { monomials },
                    rhs: 0.0,
                    coefficients,
                };
                if in_support {
                    equations.push(eq);
                } else {
                    residuals.push(eq);
                }
            }
        }
        Ok(Self { action_counts: game.action_counts().to_vec(), supports: supports.to_vec(), offsets, equations, residuals })
    }

    pub fn supports(&self) -> &[Vec<usize>] {
        &self.supports
    }

    pub fn num_vars(&self) -> usize {
        self.supports.iter().map(Vec::len).sum()
    }

    pub fn variable(&self, player: usize, action: usize) -> Option<usize> {
        self.supports[player].iter().position(|&a| a == action).map(|p| self.offsets[player] + p)
    }

    /// Support probabilities of `profile`, player-major.
    pub fn variables_of(&self, profile: &MixedProfile) -> Vec<f64> {
        self.supports.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |&a| profile.prob(i, a))).collect()
    }

    /// Expands a variable vector into a full profile (zeros off the support).
    /// The result is not validated.
    pub fn raw_profile(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.action_counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let mut v = vec![0.0; c];
                for (p, &a) in self.supports[i].iter().enumerate() {
                    v[a] = x[self.offsets[i] + p];
                }
                v
            })
            .collect()
    }

    /// `f(x) - rhs`, zero exactly at equilibria with this support.
    pub fn defect(&self, x: &[f64]) -> Vec<f64> {
        self.equations.iter().map(|e| e.poly.eval(x) - e.rhs).collect()
    }

    /// Residual slacks; all nonnegative at an equilibrium.
    pub fn residual_values(&self, x: &[f64]) -> Vec<f64> {
        self.residuals.iter().map(|e| e.poly.eval(x)).collect()
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let dim = self.num_vars();
        let mut jac = DMatrix::zeros(self.equations.len(), dim);
        let mut row = vec![0.0; dim];
        for (r, eq) in self.equations.iter().enumerate() {
            row.iter_mut().for_each(|v| *v = 0.0);
            eq.poly.add_gradient(x, &mut row);
            for (c, v) in row.iter().enumerate() {
                jac[(r, c)] = *v;
            }
        }
        jac
    }

    /// Largest absolute coefficient across all equations.
    pub fn scale(&self) -> f64 {
        self.equations.iter().map(|e| e.poly.max_abs_coeff()).fold(1.0, f64::max)
    }

    /// Two-player systems are linear. Returns the matrix and right-hand side
    /// with rows grouped by the variable block they act on: player 1's
    /// normalization and player 2's indifference rows (over player 1's
    /// probabilities), then player 2's normalization and player 1's rows.
    pub fn two_player_linear_form(&self) -> Result<(DMatrix<f64>, DVector<f64>)> {
        if self.supports.len() != 2 {
            return Err(Error::Shape("linear form needs exactly two players".into()));
        }
        let x = vec![0.0; self.num_vars()];
        let jac = self.jacobian(&x);
        let order = self.block_row_order();
        let m = DMatrix::from_fn(order.len(), self.num_vars(), |r, c| jac[(order[r], c)]);
        let rhs = DVector::from_iterator(order.len(), order.iter().map(|&r| self.equations[r].rhs));
        Ok((m, rhs))
    }

    fn block_row_order(&self) -> Vec<usize> {
        let rows_of = |player: usize| {
            self.equations
                .iter()
                .enumerate()
                .filter(move |(_, e)| matches!(e.kind, EquationKind::Indifference { player: p, .. } if p == player))
                .map(|(r, _)| r)
        };
        let mut order = vec![0];
        order.extend(rows_of(1));
        order.push(1);
        order.extend(rows_of(0));
        order
    }

    /// The incentive block of `player` in a two-player system: a row of ones
    /// over the opponent's support, then one row per non-reference supported
    /// action holding `u_i(ref, b) - u_i(k, b)` for each supported opponent
    /// action `b`.
    pub fn incentive_block(&self, player: usize) -> Result<DMatrix<f64>> {
        if self.supports.len() != 2 {
            return Err(Error::Shape("incentive blocks exist for two players only".into()));
        }
        let opp = 1 - player;
        let rows: Vec<&Equation> =
            self.equations.iter().filter(|e| matches!(e.kind, EquationKind::Indifference { player: p, .. } if p == player)).collect();
        let cols = self.supports[opp].len();
        Ok(DMatrix::from_fn(rows.len() + 1, cols, |r, c| if r == 0 { 1.0 } else { rows[r - 1].coefficients[c].1 }))
    }

    /// The indifference row for `(player, action)`.
    pub fn indifference_row(&self, player: usize, action: usize) -> Option<&Equation> {
        self.equations.iter().find(|e| e.kind == EquationKind::Indifference { player, action })
    }

    /// The same equation with `shift[k]` added to the k-th coefficient.
    pub fn shifted(&self, eq: &Equation, shift: &[f64]) -> Equation {
        let mut out = eq.clone();
        for ((m, c), s) in out.poly.monomials.iter_mut().zip(out.coefficients.iter_mut()).zip(shift) {
            m.coeff += s;
            c.1 += s;
        }
        out
    }
}

/// Determinant test relative to the matrix scale: `|det| > tol * max|entry|^dim`.
pub fn relative_det_test(m: &DMatrix<f64>, tol: f64) -> (f64, f64) {
    let det = if m.is_square() { m.clone().lu().determinant() } else { 0.0 };
    let scale = m.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let threshold = tol * scale.powi(m.nrows() as i32);
    (det, threshold)
}
