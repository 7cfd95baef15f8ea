//! The capped commitment extension: pledges, rounds, votes and sessions.
//!
//! A session alternates between a committing phase, where every player
//! submits outcome-contingent pledges simultaneously, and a vote. Unanimous
//! "continue" opens another round; a single "stop" moves to play in the game
//! obtained by applying every accepted pledge.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Game;
use crate::tol::CAP_SLACK;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Recipient {
    Player(usize),
    Burn,
}

/// Player `payer` gives up `amount` at `outcome`, to `recipient`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pledge {
    pub payer: usize,
    pub outcome: Vec<usize>,
    pub recipient: Recipient,
    pub amount: f64,
}

impl Pledge {
    pub fn burn(payer: usize, outcome: Vec<usize>, amount: f64) -> Self {
        Self { payer, outcome, recipient: Recipient::Burn, amount }
    }

    pub fn transfer(payer: usize, outcome: Vec<usize>, recipient: usize, amount: f64) -> Self {
        Self { payer, outcome, recipient: Recipient::Player(recipient), amount }
    }

    /// Sign and index legality against `game` (the cap is checked per round).
    pub fn check_against(&self, game: &Game) -> Result<(), RoundViolation> {
        let n = game.num_players();
        if self.payer >= n {
            return Err(RoundViolation::UnknownPlayer { player: self.payer });
        }
        if game.check_profile(&self.outcome).is_err() {
            return Err(RoundViolation::BadOutcome { payer: self.payer, outcome: self.outcome.clone() });
        }
        if !self.amount.is_finite() || self.amount < 0.0 {
            return Err(RoundViolation::NegativeAmount { payer: self.payer, outcome: self.outcome.clone(), amount: self.amount });
        }
        match self.recipient {
            Recipient::Player(r) if r == self.payer => Err(RoundViolation::SelfPayment { payer: self.payer }),
            Recipient::Player(r) if r >= n => Err(RoundViolation::UnknownPlayer { player: r }),
            _ => Ok(()),
        }
    }
}

/// One simultaneous commitment round.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CommitmentRound {
    pub pledges: Vec<Pledge>,
}

impl CommitmentRound {
    pub fn new(pledges: Vec<Pledge>) -> Self {
        Self { pledges }
    }

    pub fn is_empty(&self) -> bool {
        self.pledges.is_empty()
    }

    pub fn pledges_of(&self, payer: usize) -> impl Iterator<Item = &Pledge> {
        self.pledges.iter().filter(move |p| p.payer == payer)
    }

    /// Round with `payer`'s pledges replaced by `replacement`.
    pub fn with_player_replaced(&self, payer: usize, replacement: &[Pledge]) -> Self {
        let mut pledges: Vec<Pledge> = self.pledges.iter().filter(|p| p.payer != payer).cloned().collect();
        pledges.extend(replacement.iter().cloned());
        Self { pledges }
    }

    /// Largest total a single payer commits at a single outcome.
    pub fn max_spend(&self) -> f64 {
        let mut totals: Vec<(usize, &[usize], f64)> = Vec::new();
        for p in &self.pledges {
            match totals.iter_mut().find(|(q, o, _)| *q == p.payer && *o == p.outcome.as_slice()) {
                Some(t) => t.2 += p.amount,
                None => totals.push((p.payer, &p.outcome, p.amount)),
            }
        }
        totals.iter().map(|t| t.2).fold(0.0, f64::max)
    }

    pub fn burned(&self) -> f64 {
        self.pledges.iter().filter(|p| p.recipient == Recipient::Burn).map(|p| p.amount).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Transfers,
    BurnOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Committing,
    Voting,
    Playing,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vote {
    Continue,
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RoundViolation {
    UnknownPlayer { player: usize },
    BadOutcome { payer: usize, outcome: Vec<usize> },
    NegativeAmount { payer: usize, outcome: Vec<usize>, amount: f64 },
    SelfPayment { payer: usize },
    CapExceeded { payer: usize, outcome: Vec<usize>, total: f64, delta: f64 },
    TransferInBurnMode { payer: usize, outcome: Vec<usize> },
}

impl fmt::Display for RoundViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoundViolation::UnknownPlayer { player } => write!(f, "unknown player {}", player + 1),
            RoundViolation::BadOutcome { payer, outcome } => {
                write!(f, "player {} pledged on invalid outcome {:?}", payer + 1, one_based(outcome))
            }
            RoundViolation::NegativeAmount { payer, outcome, amount } => {
                write!(f, "player {} pledged non-positive or non-finite amount {amount} on {:?}", payer + 1, one_based(outcome))
            }
            RoundViolation::SelfPayment { payer } => write!(f, "player {} pledged to itself", payer + 1),
            RoundViolation::CapExceeded { payer, outcome, total, delta } => {
                write!(f, "player {} pledged {total} on {:?}, above the cap {delta}", payer + 1, one_based(outcome))
            }
            RoundViolation::TransferInBurnMode { payer, outcome } => {
                write!(f, "player {} pledged to a player on {:?} but only burning is allowed", payer + 1, one_based(outcome))
            }
        }
    }
}

fn one_based(outcome: &[usize]) -> Vec<usize> {
    outcome.iter().map(|a| a + 1).collect()
}

/// Checks a round against a game, cap and mode without any session state.
pub fn validate_round(game: &Game, delta: f64, mode: Mode, round: &CommitmentRound) -> Result<(), RoundViolation> {
    let mut totals: Vec<(usize, &[usize], f64)> = Vec::new();
    for p in &round.pledges {
        p.check_against(game)?;
        if mode == Mode::BurnOnly && p.recipient != Recipient::Burn {
            return Err(RoundViolation::TransferInBurnMode { payer: p.payer, outcome: p.outcome.clone() });
        }
        match totals.iter_mut().find(|(q, o, _)| *q == p.payer && *o == p.outcome.as_slice()) {
            Some(t) => t.2 += p.amount,
            None => totals.push((p.payer, &p.outcome, p.amount)),
        }
    }
    for (payer, outcome, total) in totals {
        if total > delta + CAP_SLACK {
            return Err(RoundViolation::CapExceeded { payer, outcome: outcome.to_vec(), total, delta });
        }
    }
    Ok(())
}

/// Full history of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub delta: f64,
    pub mode: Mode,
    pub rounds: Vec<CommitmentRound>,
    pub votes: Vec<Vec<Vote>>,
    pub terminal_actions: Option<Vec<usize>>,
    pub final_payoffs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    base: Game,
    current: Game,
    delta: f64,
    mode: Mode,
    phase: Phase,
    transcript: Transcript,
}

impl SessionState {
    pub fn open(game: Game, delta: f64, mode: Mode) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidDelta(delta));
        }
        Ok(Self {
            current: game.clone(),
            base: game,
            delta,
            mode,
            phase: Phase::Committing,
            transcript: Transcript { delta, mode, rounds: Vec::new(), votes: Vec::new(), terminal_actions: None, final_payoffs: None },
        })
    }

    pub fn base_game(&self) -> &Game {
        &self.base
    }

    pub fn current_game(&self) -> &Game {
        &self.current
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    pub fn validate_round(&self, round: &CommitmentRound) -> Result<(), RoundViolation> {
        validate_round(&self.current, self.delta, self.mode, round)
    }

    fn expect_phase(&self, expected: Phase) -> Result<()> {
        if self.phase == expected {
            Ok(())
        } else {
            Err(Error::WrongPhase { expected, found: self.phase })
        }
    }

    pub fn submit_round(&self, round: CommitmentRound) -> Result<Self> {
        self.expect_phase(Phase::Committing)?;
        self.validate_round(&round)?;
        let mut next = self.clone();
        next.current = self.current.apply_transfers(&round)?;
        next.transcript.rounds.push(round);
        next.phase = Phase::Voting;
        Ok(next)
    }

    /// Records one vote per player. Voting straight from the committing phase
    /// records an empty round first.
    pub fn cast_votes(&self, votes: Vec<Vote>) -> Result<Self> {
        let state = if self.phase == Phase::Committing { self.submit_round(CommitmentRound::default())? } else { self.clone() };
        state.expect_phase(Phase::Voting)?;
        if votes.len() != state.base.num_players() {
            return Err(Error::Shape(format!("expected {} votes, got {}", state.base.num_players(), votes.len())));
        }
        let mut next = state;
        next.phase = if votes.iter().all(|&v| v == Vote::Continue) { Phase::Committing } else { Phase::Playing };
        next.transcript.votes.push(votes);
        Ok(next)
    }

    pub fn play_terminal(&self, actions: Vec<usize>) -> Result<Self> {
        self.expect_phase(Phase::Playing)?;
        self.current.check_profile(&actions)?;
        let mut next = self.clone();
        next.transcript.final_payoffs = Some(self.current.payoffs(&actions).to_vec());
        next.transcript.terminal_actions = Some(actions);
        next.phase = Phase::Done;
        Ok(next)
    }

    /// Re-executes a transcript on `base`. Errors carry the round index at
    /// which the replay broke (the terminal step counts as one past the last
    /// round).
    pub fn replay(base: Game, transcript: &Transcript) -> Result<Self> {
        let wrap = |step: usize| move |e: Error| Error::Replay { step, source: Box::new(e) };
        let mut state = Self::open(base, transcript.delta, transcript.mode).map_err(wrap(0))?;
        for (k, round) in transcript.rounds.iter().enumerate() {
            state = state.submit_round(round.clone()).map_err(wrap(k))?;
            if let Some(votes) = transcript.votes.get(k) {
                state = state.cast_votes(votes.clone()).map_err(wrap(k))?;
            }
        }
        if let Some(actions) = &transcript.terminal_actions {
            let step = transcript.rounds.len();
            state = state.play_terminal(actions.clone()).map_err(wrap(step))?;
            if let Some(recorded) = &transcript.final_payoffs {
                let replayed = state.transcript.final_payoffs.as_ref().expect("set by play_terminal");
                if replayed.iter().zip(recorded).any(|(a, b)| (a - b).abs() > 1e-12) {
                    return Err(wrap(step)(Error::Parse(format!("recorded final payoffs {recorded:?} differ from replayed {replayed:?}"))));
                }
            }
        }
        Ok(state)
    }
}
