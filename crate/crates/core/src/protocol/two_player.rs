//! Two players, full support, at least three actions each: row operations on
//! the incentive blocks that never touch the normalization row.

use nalgebra::DMatrix;

use super::compile::{chunk_burns, incentive_burns, merge_tracks, Relabeling};
use super::partial::{empty_plan, plan_from};
use super::plan::{CaseTag, PlanStage, ProtocolPlan};
use crate::commitment::{CommitmentRound, Mode, Pledge};
use crate::equilibria::{build_characteristic_system, is_pure_nash};
use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile};

/// One row operation: add `coeffs[r] * row[pivot]` to every row `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowOperation {
    pub player: usize,
    pub pivot: usize,
    pub coeffs: Vec<f64>,
}

impl RowOperation {
    /// Coefficient changes `deltas[k][b]` the operation induces, with row `r`
    /// of the block standing for action `r` (row 0 is the normalization row).
    fn deltas(&self, block: &DMatrix<f64>) -> Vec<Vec<f64>> {
        (0..block.nrows()).map(|r| (0..block.ncols()).map(|b| self.coeffs[r] * block[(self.pivot, b)]).collect()).collect()
    }

    pub fn apply(&self, block: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = block.clone();
        for r in 0..block.nrows() {
            if self.coeffs[r] != 0.0 {
                for b in 0..block.ncols() {
                    out[(r, b)] += self.coeffs[r] * block[(self.pivot, b)];
                }
            }
        }
        out
    }
}

/// Row operations making every entry of the first column (below the
/// normalization row) positive. Each added row has a positive first entry at
/// the moment it is added, so the target column only ever increases.
pub fn first_column_operations(player: usize, block: &DMatrix<f64>) -> Result<Vec<RowOperation>> {
    let n = block.nrows();
    let col: Vec<f64> = (1..n).map(|r| block[(r, 0)]).collect();
    if col.iter().all(|&v| v > 0.0) {
        return Ok(Vec::new());
    }
    if n < 3 {
        return Err(Error::Infeasible("row operations need at least three actions".into()));
    }
    let mut ops = Vec::new();
    let mut current = block.clone();
    let argmax = (1..n).max_by(|&a, &b| current[(a, 0)].total_cmp(&current[(b, 0)])).expect("n >= 3");
    if current[(argmax, 0)] <= 0.0 {
        // all nonpositive: a negative pivot lifts every other row to |pivot|
        let s = (1..n).min_by(|&a, &b| current[(a, 0)].total_cmp(&current[(b, 0)])).expect("n >= 3");
        let ps = current[(s, 0)];
        if ps >= 0.0 {
            return Err(Error::Degenerate("first column of the incentive block vanishes".into()));
        }
        let coeffs = (0..n).map(|r| if r == 0 || r == s { 0.0 } else { (ps.abs() - current[(r, 0)]) / ps }).collect();
        let op = RowOperation { player, pivot: s, coeffs };
        current = op.apply(&current);
        ops.push(op);
    }
    let p = (1..n).max_by(|&a, &b| current[(a, 0)].total_cmp(&current[(b, 0)])).expect("n >= 3");
    let pp = current[(p, 0)];
    let coeffs: Vec<f64> = (0..n).map(|r| if r == 0 || r == p || current[(r, 0)] > 0.0 { 0.0 } else { 1.0 - current[(r, 0)] / pp }).collect();
    if coeffs.iter().any(|&c| c != 0.0) {
        ops.push(RowOperation { player, pivot: p, coeffs });
    }
    Ok(ops)
}

fn block_of(game: &Game, player: usize) -> Result<DMatrix<f64>> {
    let full: Vec<Vec<usize>> = game.action_counts().iter().map(|&c| (0..c).collect()).collect();
    build_characteristic_system(game, &full)?.incentive_block(player)
}

/// Per-player rounds realizing `ops` in order on the relabeled game.
fn track_for(game: &Game, player: usize, ops: &[RowOperation], delta: f64) -> Result<Vec<Vec<Pledge>>> {
    let mut g = game.clone();
    let mut track = Vec::new();
    for op in ops {
        let block = block_of(&g, player)?;
        let burns = incentive_burns(g.action_counts(), player, 0, &op.deltas(&block));
        let chunks = chunk_burns(player, &burns, delta);
        for c in &chunks {
            g = g.apply_transfers(&CommitmentRound::new(c.clone()))?;
        }
        track.extend(chunks);
    }
    Ok(track)
}

/// Plan for two players with a full-support `sigma` and equal action counts
/// of at least three.
pub fn build_two_player_plan(game: &Game, sigma: &MixedProfile, target: &[usize], delta: f64) -> Result<ProtocolPlan> {
    let counts = game.action_counts();
    if counts.len() != 2 || !sigma.has_full_support() {
        return Err(Error::Hypothesis("expects two players and a full-support equilibrium".into()));
    }
    if counts[0] != counts[1] || counts[0] < 3 {
        return Err(Error::Infeasible(format!("row operations need equal action counts of at least three, got {}x{}", counts[0], counts[1])));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let case = CaseTag::FullSupport2p;
    if is_pure_nash(game, target, 0.0) {
        return empty_plan(game, sigma, target, case, delta, Mode::BurnOnly);
    }
    let relabel = Relabeling::leading(counts, target, &[]);
    let g = relabel.game(game);
    let mut tracks = Vec::with_capacity(2);
    for player in 0..2 {
        let ops = first_column_operations(player, &block_of(&g, player)?)?;
        tracks.push(track_for(&g, player, &ops, delta)?);
    }
    let rounds: Vec<CommitmentRound> = merge_tracks(tracks).iter().map(|r| relabel.round_to_original(r)).collect();
    let base = game.expected_utilities(sigma)?;
    let margin = game.pareto_improves(target, sigma)?.margin;
    let stage = PlanStage {
        case,
        from_round: 0,
        to_round: rounds.len(),
        baseline: sigma.clone(),
        reference_support: sigma.supports(),
        ceiling: base.iter().map(|u| u + margin).collect(),
        pure_fallback: false,
        baseline_fixed: true,
        target_fixed: true,
        label: "row operations on the incentive blocks".into(),
    };
    plan_from(game, sigma, target, case, delta, Mode::BurnOnly, rounds, vec![stage], Some(&relabel))
}
