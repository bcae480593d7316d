//! Heads-up Kuhn, Leduc and fixed-limit Hold'em as extensive-form state
//! machines.
//!
//! Seat 0 is the small blind (the first player in Kuhn), seat 1 the big
//! blind. States are immutable snapshots: [`GameState::apply_action`] returns
//! a new state.

mod dump;
mod key;
mod state;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::CardError;

pub use dump::StateDump;
pub use key::{format_history, infoset_key, parse_history};
pub use state::{new_game, Deal, GameState, Observation, TerminalKind};

pub const STARTING_STACK: u32 = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("state is terminal")]
    TerminalState,
    #[error("state is not terminal")]
    NonTerminal,
    #[error("illegal action {action} (legal: {legal:?})")]
    IllegalAction { action: Action, legal: Vec<Action> },
    #[error(transparent)]
    Cards(#[from] CardError),
    #[error("unknown variant {0:?}")]
    UnknownVariant(String),
    #[error("unknown action {0:?}")]
    UnknownAction(String),
    #[error("malformed history {0:?}")]
    MalformedHistory(String),
    #[error("state dump does not replay: {0}")]
    InconsistentDump(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Kuhn,
    Leduc,
    Limit,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Kuhn, Variant::Leduc, Variant::Limit];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Kuhn => "kuhn",
            Variant::Leduc => "leduc",
            Variant::Limit => "limit",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Variant::Kuhn => "Kuhn Poker",
            Variant::Leduc => "Leduc Hold'em",
            Variant::Limit => "Limit Hold'em",
        }
    }

    pub fn structure(self) -> BettingStructure {
        BettingStructure::for_variant(self)
    }

    /// Valid community-card counts, indexed by betting round.
    pub fn board_sizes(self) -> &'static [usize] {
        match self {
            Variant::Kuhn => &[0],
            Variant::Leduc => &[0, 1],
            Variant::Limit => &[0, 3, 4, 5],
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kuhn" => Ok(Variant::Kuhn),
            "leduc" => Ok(Variant::Leduc),
            "limit" | "limit_holdem" | "limit-holdem" => Ok(Variant::Limit),
            _ => Err(GameError::UnknownVariant(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Fold,
    Check,
    Call,
    Bet,
    Raise,
}

impl Action {
    pub fn name(self) -> &'static str {
        match self {
            Action::Fold => "fold",
            Action::Check => "check",
            Action::Call => "call",
            Action::Bet => "bet",
            Action::Raise => "raise",
        }
    }

    /// Single-letter code used in infoset keys and history strings.
    pub fn code(self) -> char {
        match self {
            Action::Fold => 'f',
            Action::Check => 'x',
            Action::Call => 'c',
            Action::Bet => 'b',
            Action::Raise => 'r',
        }
    }

    pub fn from_code(c: char) -> Option<Action> {
        match c {
            'f' => Some(Action::Fold),
            'x' => Some(Action::Check),
            'c' => Some(Action::Call),
            'b' => Some(Action::Bet),
            'r' => Some(Action::Raise),
            _ => None,
        }
    }

    pub fn is_aggressive(self) -> bool {
        matches!(self, Action::Bet | Action::Raise)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Action {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fold" => Ok(Action::Fold),
            "check" => Ok(Action::Check),
            "call" => Ok(Action::Call),
            "bet" => Ok(Action::Bet),
            "raise" => Ok(Action::Raise),
            _ => Err(GameError::UnknownAction(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Position {
    SB,
    BB,
}

impl Position {
    pub fn seat(self) -> usize {
        match self {
            Position::SB => 0,
            Position::BB => 1,
        }
    }

    pub fn from_seat(seat: usize) -> Position {
        if seat == 0 {
            Position::SB
        } else {
            Position::BB
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            Position::SB => "Small Blind",
            Position::BB => "Big Blind",
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Position::SB => "SB",
            Position::BB => "BB",
        })
    }
}

/// Forced bets, bet sizes and caps for one variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BettingStructure {
    pub variant: Variant,
    /// Forced contribution per seat. Kuhn posts equal antes.
    pub blinds: [u32; 2],
    /// Fixed bet/raise increment per round.
    pub bet_sizes: Vec<u32>,
    /// Maximum number of bets plus raises per round, blinds excluded.
    pub raise_cap: u32,
    /// Seat that opens each round.
    pub first_to_act: Vec<usize>,
    /// Community cards revealed at the start of each round.
    pub reveal: Vec<usize>,
    pub hole_cards: usize,
}

impl BettingStructure {
    pub fn for_variant(variant: Variant) -> Self {
        match variant {
            Variant::Kuhn => Self {
                variant,
                blinds: [1, 1],
                bet_sizes: vec![1],
                raise_cap: 1,
                first_to_act: vec![0],
                reveal: vec![0],
                hole_cards: 1,
            },
            Variant::Leduc => Self {
                variant,
                blinds: [1, 2],
                bet_sizes: vec![2, 4],
                raise_cap: 2,
                first_to_act: vec![0, 0],
                reveal: vec![0, 1],
                hole_cards: 1,
            },
            Variant::Limit => Self {
                variant,
                blinds: [1, 2],
                bet_sizes: vec![2, 2, 4, 4],
                raise_cap: 4,
                first_to_act: vec![0, 1, 1, 1],
                reveal: vec![0, 3, 1, 1],
                hole_cards: 2,
            },
        }
    }

    pub fn rounds(&self) -> usize {
        self.bet_sizes.len()
    }

    pub fn board_cards(&self) -> usize {
        self.reveal.iter().sum()
    }

    /// Community cards visible during `round`.
    pub fn revealed_by(&self, round: usize) -> usize {
        self.reveal[..=round].iter().sum()
    }

    /// Largest total a single seat can put in over a hand.
    pub fn max_contribution(&self) -> u32 {
        self.blinds[1].max(self.blinds[0])
            + self.bet_sizes.iter().map(|s| s * self.raise_cap).sum::<u32>()
    }

    pub fn round_name(&self, round: usize) -> &'static str {
        const NAMES: [&str; 4] = ["pre-flop", "flop", "turn", "river"];
        NAMES[round]
    }
}
