//! Support-constrained equilibrium solving and the non-degeneracy test.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::nash::is_nash;
use super::system::{relative_det_test, CharacteristicSystem};
use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile};
use crate::tol::{DET_TOL, EQ_TOL, NEWTON_MAX_ITER, NEWTON_TOL, SYSTEM_TOL};

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Solved(MixedProfile),
    /// The Jacobian is (numerically) singular.
    Degenerate {
        det: f64,
    },
    NotConverged {
        iterations: usize,
        defect: f64,
    },
    /// A root was found but is not a valid equilibrium with this support.
    Infeasible(String),
}

impl SolveOutcome {
    pub fn profile(&self) -> Option<&MixedProfile> {
        match self {
            SolveOutcome::Solved(p) => Some(p),
            _ => None,
        }
    }

    pub fn into_profile(self) -> Option<MixedProfile> {
        match self {
            SolveOutcome::Solved(p) => Some(p),
            _ => None,
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Solves for the equilibrium whose support is `supports`.
///
/// Two-player systems are linear and solved directly. With three or more
/// players a damped Newton iteration starts from `seed` (restricted to the
/// support), or from the uniform profile on the support when no seed is given.
pub fn solve_on_support(game: &Game, supports: &[Vec<usize>], seed: Option<&MixedProfile>) -> Result<SolveOutcome> {
    let sys = CharacteristicSystem::new(game, supports)?;
    let dim = sys.num_vars();
    let x = if game.num_players() == 2 {
        let (m, rhs) = sys.two_player_linear_form()?;
        let (det, threshold) = relative_det_test(&m, DET_TOL);
        if det.abs() <= threshold {
            return Ok(SolveOutcome::Degenerate { det });
        }
        match m.lu().solve(&rhs) {
            Some(sol) => sol.as_slice().to_vec(),
            None => return Ok(SolveOutcome::Degenerate { det }),
        }
    } else {
        let start = match seed {
            Some(s) => {
                s.check_shape(game)?;
                sys.variables_of(s)
            }
            None => supports.iter().flat_map(|s| std::iter::repeat_n(1.0 / s.len() as f64, s.len())).collect(),
        };
        match newton(&sys, start, dim) {
            Ok(x) => x,
            Err(outcome) => return Ok(outcome),
        }
    };
    Ok(finish(&sys, &x))
}

fn newton(sys: &CharacteristicSystem, mut x: Vec<f64>, dim: usize) -> std::result::Result<Vec<f64>, SolveOutcome> {
    let tol = NEWTON_TOL * sys.scale();
    let mut f = sys.defect(&x);
    let mut norm = inf_norm(&f);
    for _ in 0..NEWTON_MAX_ITER {
        if norm <= tol {
            return Ok(x);
        }
        let jac = sys.jacobian(&x);
        let (det, threshold) = relative_det_test(&jac, DET_TOL);
        if det.abs() <= threshold {
            return Err(SolveOutcome::Degenerate { det });
        }
        let rhs = DVector::from_iterator(dim, f.iter().map(|v| -v));
        let Some(step) = jac.lu().solve(&rhs) else {
            return Err(SolveOutcome::Degenerate { det });
        };
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            let tf = sys.defect(&trial);
            let tn = inf_norm(&tf);
            if tn < norm || t < 1e-10 {
                x = trial;
                f = tf;
                norm = tn;
                break;
            }
            t *= 0.5;
        }
    }
    if norm <= SYSTEM_TOL * sys.scale() {
        Ok(x)
    } else {
        Err(SolveOutcome::NotConverged { iterations: NEWTON_MAX_ITER, defect: norm })
    }
}

fn finish(sys: &CharacteristicSystem, x: &[f64]) -> SolveOutcome {
    let defect = inf_norm(&sys.defect(x));
    if defect > SYSTEM_TOL * sys.scale() {
        return SolveOutcome::NotConverged { iterations: 0, defect };
    }
    if let Some(p) = x.iter().find(|&&p| !(p > 0.0)) {
        return SolveOutcome::Infeasible(format!("support probability {p} is not positive"));
    }
    if let Some(r) = sys.residual_values(x).into_iter().find(|&r| r < -EQ_TOL) {
        return SolveOutcome::Infeasible(format!("an unsupported action beats the support by {}", -r));
    }
    let mut probs = sys.raw_profile(x);
    for v in &mut probs {
        for p in v.iter_mut() {
            *p = p.clamp(0.0, 1.0);
        }
    }
    match MixedProfile::new(probs) {
        Ok(p) => SolveOutcome::Solved(p),
        Err(e) => SolveOutcome::Infeasible(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub non_degenerate: bool,
    pub det: f64,
    pub det_threshold: f64,
    /// Smallest slack of an unsupported action (`+inf` with full support).
    pub min_residual: f64,
}

/// Residual slacks at or below this count as touching zero.
pub const RESIDUAL_GUARD: f64 = 1e-9;

/// Tests whether the equilibrium `profile` has a nonsingular characteristic
/// Jacobian and strictly positive residuals.
pub fn is_non_degenerate(game: &Game, profile: &MixedProfile) -> Result<DegeneracyReport> {
    let check = is_nash(game, profile, EQ_TOL)?;
    if let Some(w) = check.worst {
        return Err(Error::NotEquilibrium { player: w.player, action: w.action, gain: w.gain });
    }
    let sys = CharacteristicSystem::new(game, &profile.supports())?;
    let x = sys.variables_of(profile);
    let jac: DMatrix<f64> = sys.jacobian(&x);
    let (det, det_threshold) = relative_det_test(&jac, DET_TOL);
    let min_residual = sys.residual_values(&x).into_iter().fold(f64::INFINITY, f64::min);
    Ok(DegeneracyReport { non_degenerate: det.abs() > det_threshold && min_residual > RESIDUAL_GUARD, det, det_threshold, min_residual })
}
