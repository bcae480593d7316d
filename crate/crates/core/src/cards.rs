//! Cards, per-variant decks and the text code grammar.
//!
//! A card code is two characters, suit then rank: `SQ`, `C7`, `HT`. Input is
//! case-insensitive; output is always upper-case.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::game::Variant;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CardError {
    #[error("invalid card code {0:?}")]
    InvalidCode(String),
    #[error("duplicate card {0}")]
    DuplicateCard(Card),
    #[error("expected {expected} cards, got {got}")]
    WrongCardinality { expected: usize, got: usize },
    #[error("card {card} is not part of the {variant} deck")]
    NotInDeck { card: Card, variant: Variant },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suit {
    Spades,
    Hearts,
    Diamonds,
    Clubs,
}

impl Suit {
    pub const ALL: [Suit; 4] = [Suit::Spades, Suit::Hearts, Suit::Diamonds, Suit::Clubs];

    pub fn letter(self) -> char {
        match self {
            Suit::Spades => 'S',
            Suit::Hearts => 'H',
            Suit::Diamonds => 'D',
            Suit::Clubs => 'C',
        }
    }

    pub fn from_letter(c: char) -> Option<Suit> {
        match c.to_ascii_uppercase() {
            'S' => Some(Suit::Spades),
            'H' => Some(Suit::Hearts),
            'D' => Some(Suit::Diamonds),
            'C' => Some(Suit::Clubs),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suit::Spades => "Spades",
            Suit::Hearts => "Hearts",
            Suit::Diamonds => "Diamonds",
            Suit::Clubs => "Clubs",
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

/// Card rank, stored as its pip value (2..=14, ace high).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rank(u8);

impl Rank {
    pub const TWO: Rank = Rank(2);
    pub const TEN: Rank = Rank(10);
    pub const JACK: Rank = Rank(11);
    pub const QUEEN: Rank = Rank(12);
    pub const KING: Rank = Rank(13);
    pub const ACE: Rank = Rank(14);

    pub fn new(value: u8) -> Option<Rank> {
        (2..=14).contains(&value).then_some(Rank(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn all() -> impl DoubleEndedIterator<Item = Rank> {
        (2..=14).map(Rank)
    }

    pub fn to_char(self) -> char {
        match self.0 {
            2..=9 => (b'0' + self.0) as char,
            10 => 'T',
            11 => 'J',
            12 => 'Q',
            13 => 'K',
            _ => 'A',
        }
    }

    pub fn from_char(c: char) -> Option<Rank> {
        let v = match c.to_ascii_uppercase() {
            d @ '2'..='9' => d as u8 - b'0',
            'T' => 10,
            'J' => 11,
            'Q' => 12,
            'K' => 13,
            'A' => 14,
            _ => return None,
        };
        Some(Rank(v))
    }

    pub fn name(self) -> &'static str {
        const NAMES: [&str; 13] = [
            "Two", "Three", "Four", "Five", "Six", "Seven", "Eight", "Nine", "Ten", "Jack",
            "Queen", "King", "Ace",
        ];
        NAMES[self.0 as usize - 2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Card {
    pub rank: Rank,
    pub suit: Suit,
}

impl Card {
    pub fn new(rank: Rank, suit: Suit) -> Self {
        Self { rank, suit }
    }

    /// Dense index in `0..52`, rank-major.
    pub fn index(self) -> usize {
        (self.rank.0 as usize - 2) * 4 + self.suit.index()
    }

    pub fn from_index(i: usize) -> Card {
        Card {
            rank: Rank((i / 4) as u8 + 2),
            suit: Suit::ALL[i % 4],
        }
    }

    /// "Queen of Hearts"
    pub fn long_name(self) -> String {
        format!("{} of {}", self.rank.name(), self.suit.name())
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.suit.letter(), self.rank.to_char())
    }
}

/// Parse a two-character `<suit><rank>` code.
pub fn parse_card(code: &str) -> Result<Card, CardError> {
    let mut chars = code.chars();
    let (Some(s), Some(r), None) = (chars.next(), chars.next(), chars.next()) else {
        return Err(CardError::InvalidCode(code.to_string()));
    };
    match (Suit::from_letter(s), Rank::from_char(r)) {
        (Some(suit), Some(rank)) => Ok(Card { rank, suit }),
        _ => Err(CardError::InvalidCode(code.to_string())),
    }
}

impl FromStr for Card {
    type Err = CardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_card(s)
    }
}

impl Serialize for Card {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Card {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_card(&s).map_err(serde::de::Error::custom)
    }
}

/// Parse a comma- or whitespace-separated list of card codes.
pub fn parse_cards(text: &str) -> Result<Vec<Card>, CardError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(parse_card)
        .collect()
}

pub fn format_cards(cards: &[Card]) -> String {
    cards.iter().map(Card::to_string).collect::<Vec<_>>().join(",")
}

/// Error on the first card that appears twice.
pub fn ensure_distinct(cards: &[Card]) -> Result<(), CardError> {
    let mut seen = 0u64;
    for &c in cards {
        let bit = 1u64 << c.index();
        if seen & bit != 0 {
            return Err(CardError::DuplicateCard(c));
        }
        seen |= bit;
    }
    Ok(())
}

/// The deck a variant is dealt from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeckSpec {
    pub variant: Variant,
    pub cards: Vec<Card>,
}

impl DeckSpec {
    pub fn for_variant(variant: Variant) -> Self {
        let cards = match variant {
            // Kuhn is suitless; spades stand in for the missing suit.
            Variant::Kuhn => [Rank::JACK, Rank::QUEEN, Rank::KING]
                .into_iter()
                .map(|r| Card::new(r, Suit::Spades))
                .collect(),
            Variant::Leduc => [Rank::JACK, Rank::QUEEN, Rank::KING]
                .into_iter()
                .flat_map(|r| [Card::new(r, Suit::Spades), Card::new(r, Suit::Hearts)])
                .collect(),
            Variant::Limit => (0..52).map(Card::from_index).collect(),
        };
        Self { variant, cards }
    }

    pub fn contains(&self, card: Card) -> bool {
        self.cards.contains(&card)
    }

    /// Every card must belong to the deck and appear at most once.
    pub fn check(&self, cards: &[Card]) -> Result<(), CardError> {
        for &card in cards {
            if !self.contains(card) {
                return Err(CardError::NotInDeck {
                    card,
                    variant: self.variant,
                });
            }
        }
        ensure_distinct(cards)
    }

    /// Deck cards not in `dead`.
    pub fn remaining(&self, dead: &[Card]) -> Vec<Card> {
        self.cards.iter().copied().filter(|c| !dead.contains(c)).collect()
    }
}
