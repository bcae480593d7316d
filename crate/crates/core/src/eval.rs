//! Showdown ranking for all three variants.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::cards::{ensure_distinct, Card, CardError, DeckSpec};
use crate::game::Variant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    HighCard,
    Pair,
    TwoPair,
    Trips,
    Straight,
    Flush,
    FullHouse,
    Quads,
    StraightFlush,
}

impl Category {
    pub const ALL: [Category; 9] = [
        Category::HighCard,
        Category::Pair,
        Category::TwoPair,
        Category::Trips,
        Category::Straight,
        Category::Flush,
        Category::FullHouse,
        Category::Quads,
        Category::StraightFlush,
    ];

    /// Number of significant ranks that follow the category.
    pub fn kicker_len(self) -> usize {
        match self {
            Category::HighCard | Category::Flush => 5,
            Category::Pair => 4,
            Category::TwoPair | Category::Trips => 3,
            Category::FullHouse | Category::Quads => 2,
            Category::Straight | Category::StraightFlush => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::HighCard => "high_card",
            Category::Pair => "pair",
            Category::TwoPair => "two_pair",
            Category::Trips => "trips",
            Category::Straight => "straight",
            Category::Flush => "flush",
            Category::FullHouse => "full_house",
            Category::Quads => "quads",
            Category::StraightFlush => "straight_flush",
        }
    }
}

/// Strength of a best-five-card hand. Ordering is the category, then the
/// rank values most-significant-first (for a straight, its top card).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HandRank {
    pub category: Category,
    ranks: [u8; 5],
}

impl HandRank {
    pub fn new(category: Category, kickers: &[u8]) -> Self {
        assert_eq!(kickers.len(), category.kicker_len());
        let mut ranks = [0u8; 5];
        ranks[..kickers.len()].copy_from_slice(kickers);
        Self { category, ranks }
    }

    pub fn kickers(&self) -> &[u8] {
        &self.ranks[..self.category.kicker_len()]
    }
}

/// Best hand among 5 to 7 cards. Cards are assumed distinct.
pub fn rank_hand(cards: &[Card]) -> HandRank {
    debug_assert!((5..=7).contains(&cards.len()));
    let mut counts = [0u8; 15];
    let mut rank_mask = 0u16;
    let mut suit_masks = [0u16; 4];
    for c in cards {
        let r = c.rank.value();
        counts[r as usize] += 1;
        rank_mask |= 1 << r;
        suit_masks[c.suit as usize] |= 1 << r;
    }

    if let Some(&suited) = suit_masks.iter().find(|m| m.count_ones() >= 5) {
        if let Some(high) = straight_high(suited) {
            return HandRank::new(Category::StraightFlush, &[high]);
        }
        return HandRank::new(Category::Flush, &top_ranks::<5>(suited));
    }

    // Ranks grouped by multiplicity, each list high to low.
    let mut quads = None;
    let (mut trips, mut n_trips) = ([0u8; 2], 0);
    let (mut pairs, mut n_pairs) = ([0u8; 3], 0);
    for r in (2..=14u8).rev() {
        match counts[r as usize] {
            4 => quads = Some(r),
            3 => {
                trips[n_trips] = r;
                n_trips += 1;
            }
            2 => {
                pairs[n_pairs] = r;
                n_pairs += 1;
            }
            _ => {}
        }
    }
    let trips = &trips[..n_trips];
    let pairs = &pairs[..n_pairs];

    if let Some(q) = quads {
        let kicker = top_ranks::<1>(rank_mask & !(1 << q))[0];
        return HandRank::new(Category::Quads, &[q, kicker]);
    }
    if let Some(&t) = trips.first() {
        let pair = trips.get(1).copied().into_iter().chain(pairs.first().copied()).max();
        if let Some(p) = pair {
            return HandRank::new(Category::FullHouse, &[t, p]);
        }
    }
    if let Some(high) = straight_high(rank_mask) {
        return HandRank::new(Category::Straight, &[high]);
    }
    if let Some(&t) = trips.first() {
        let k = top_ranks::<2>(rank_mask & !(1 << t));
        return HandRank::new(Category::Trips, &[t, k[0], k[1]]);
    }
    if pairs.len() >= 2 {
        let (a, b) = (pairs[0], pairs[1]);
        let k = top_ranks::<1>(rank_mask & !(1 << a) & !(1 << b));
        return HandRank::new(Category::TwoPair, &[a, b, k[0]]);
    }
    if let Some(&p) = pairs.first() {
        let k = top_ranks::<3>(rank_mask & !(1 << p));
        return HandRank::new(Category::Pair, &[p, k[0], k[1], k[2]]);
    }
    HandRank::new(Category::HighCard, &top_ranks::<5>(rank_mask))
}

fn straight_high(mask: u16) -> Option<u8> {
    // ace also plays low
    let mask = if mask & (1 << 14) != 0 { mask | (1 << 1) } else { mask };
    (5..=14u8).rev().find(|&high| {
        let run = 0b11111u16 << (high - 4);
        mask & run == run
    })
}

fn top_ranks<const N: usize>(mut mask: u16) -> [u8; N] {
    let mut out = [0u8; N];
    for slot in out.iter_mut() {
        let high = 15 - mask.leading_zeros() as u8;
        *slot = high;
        mask &= !(1 << high);
    }
    out
}

/// Rank exactly seven distinct cards.
pub fn rank_hand_limit(cards: &[Card]) -> Result<HandRank, CardError> {
    if cards.len() != 7 {
        return Err(CardError::WrongCardinality {
            expected: 7,
            got: cards.len(),
        });
    }
    ensure_distinct(cards)?;
    Ok(rank_hand(cards))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Win,
    Tie,
    Lose,
}

impl Outcome {
    pub fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Greater => Outcome::Win,
            Ordering::Equal => Outcome::Tie,
            Ordering::Less => Outcome::Lose,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Outcome::Win => Outcome::Lose,
            Outcome::Tie => Outcome::Tie,
            Outcome::Lose => Outcome::Win,
        }
    }
}

/// Showdown result from `mine`'s perspective. Validates card counts and
/// deck membership.
pub fn compare_showdown(
    variant: Variant,
    mine: &[Card],
    opp: &[Card],
    community: &[Card],
) -> Result<Outcome, CardError> {
    let (hole, board) = match variant {
        Variant::Kuhn => (1, 0),
        Variant::Leduc => (1, 1),
        Variant::Limit => (2, 5),
    };
    for (set, n) in [(mine, hole), (opp, hole), (community, board)] {
        if set.len() != n {
            return Err(CardError::WrongCardinality {
                expected: n,
                got: set.len(),
            });
        }
    }
    let all: Vec<Card> = mine.iter().chain(opp).chain(community).copied().collect();
    DeckSpec::for_variant(variant).check(&all)?;
    Ok(showdown_unchecked(variant, mine, opp, community))
}

/// Same as [`compare_showdown`] without validation; hot paths use this.
pub(crate) fn showdown_unchecked(
    variant: Variant,
    mine: &[Card],
    opp: &[Card],
    community: &[Card],
) -> Outcome {
    match variant {
        Variant::Kuhn => Outcome::from_ordering(mine[0].rank.cmp(&opp[0].rank)),
        Variant::Leduc => {
            let board = community[0].rank;
            let key = |c: Card| (c.rank == board, c.rank);
            Outcome::from_ordering(key(mine[0]).cmp(&key(opp[0])))
        }
        Variant::Limit => {
            let mut a = [mine[0]; 7];
            let mut b = [opp[0]; 7];
            a[1] = mine[1];
            b[1] = opp[1];
            a[2..].copy_from_slice(community);
            b[2..].copy_from_slice(community);
            Outcome::from_ordering(rank_hand(&a).cmp(&rank_hand(&b)))
        }
    }
}
