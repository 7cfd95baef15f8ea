//! Command-line notation for profiles, supports and lists.
//!
//! Players are separated by `/` (or `x`), actions within a player by `,`.
//! Actions may be given by name or by 1-based index.

use anyhow::{anyhow, bail, Context, Result};
use commitment_games::equilibria::{solve_on_support, SolveOutcome};
use commitment_games::{Game, MixedProfile};

fn players(text: &str) -> Vec<&str> {
    if text.contains('/') {
        text.split('/').collect()
    } else {
        text.split('x').collect()
    }
}

pub fn action(game: &Game, player: usize, token: &str) -> Result<usize> {
    let token = token.trim();
    let count = game.action_counts()[player];
    if let Some(names) = game.action_names() {
        if let Some(a) = names[player].iter().position(|n| n == token) {
            return Ok(a);
        }
    }
    match token.parse::<usize>() {
        Ok(k) if (1..=count).contains(&k) => Ok(k - 1),
        _ => bail!("player {} has no action `{token}` (use a name or 1..={count})", player + 1),
    }
}

/// `A,B` or `1,2`: one action per player.
pub fn profile(game: &Game, text: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != game.num_players() {
        bail!("profile `{text}` names {} actions for {} players", parts.len(), game.num_players());
    }
    parts.iter().enumerate().map(|(i, t)| action(game, i, t)).collect()
}

/// `1,2/1,2`: one sorted action set per player.
pub fn supports(game: &Game, text: &str) -> Result<Vec<Vec<usize>>> {
    let parts = players(text);
    if parts.len() != game.num_players() {
        bail!("support `{text}` lists {} players, the game has {}", parts.len(), game.num_players());
    }
    parts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut s = p.split(',').map(|t| action(game, i, t)).collect::<Result<Vec<_>>>()?;
            s.sort_unstable();
            s.dedup();
            Ok(s)
        })
        .collect()
}

pub fn reals(text: &str) -> Result<Vec<f64>> {
    text.split(',').map(|t| t.trim().parse::<f64>().with_context(|| format!("`{t}` is not a number"))).collect()
}

/// A mixed profile in one of the forms
/// `A,B` (pure), `uniform:1,2/1,2`, `probs:0.5,0.5/0.2,0.8`, `solve:1,2/1,2`.
pub fn mixed(game: &Game, text: &str) -> Result<MixedProfile> {
    let counts = game.action_counts();
    let (kind, rest) = text.split_once(':').unwrap_or(("pure", text));
    match kind {
        "pure" => Ok(MixedProfile::pure(counts, &profile(game, rest)?)),
        "uniform" => Ok(MixedProfile::uniform_on(counts, &supports(game, rest)?)),
        "probs" => {
            let probs = players(rest).into_iter().map(reals).collect::<Result<Vec<_>>>()?;
            let p = MixedProfile::new(probs)?;
            p.check_shape(game)?;
            Ok(p)
        }
        "solve" => {
            let s = supports(game, rest)?;
            match solve_on_support(game, &s, None)? {
                SolveOutcome::Solved(p) => Ok(p),
                other => Err(anyhow!("no equilibrium on support `{rest}`: {other:?}")),
            }
        }
        _ => bail!("unknown profile form `{kind}` (expected pure, uniform, probs or solve)"),
    }
}
