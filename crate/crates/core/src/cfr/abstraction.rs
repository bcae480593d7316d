//! Hand-strength bucketing for Limit Hold'em.
//!
//! A holding's strength on a street is its equity against one uniformly
//! random opponent holding (pre-flop: looked up per starting-hand class;
//! flop and turn: sampled run-outs seeded by the cards themselves; river:
//! exact). Buckets are percentiles of that strength, calibrated once per
//! street on random deals, so each bucket holds roughly the same share of
//! holdings.

use serde::{Deserialize, Serialize};

use crate::cards::{Card, DeckSpec, Rank, Suit};
use crate::equity::strength_vs_uniform;
use crate::game::{format_history, Observation, Variant};
use crate::rng::{derive_seed, SplitMix64};

const PREFLOP_SAMPLES: u32 = 1_500;
const CALIBRATION_DEALS: usize = 1_000;
const STRENGTH_SEED: u64 = 0x005E_ED0F_B0C3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketAbstraction {
    pub buckets: usize,
    /// Run-outs sampled for flop and turn strength.
    pub rollouts: u32,
    /// Strength of each of the 169 starting-hand classes.
    pub preflop_strength: Vec<f64>,
    /// Per street, the `buckets - 1` ascending percentile cut points.
    pub thresholds: Vec<Vec<f64>>,
}

/// Index of a starting hand's class: pairs on the diagonal, suited hands
/// above it, offsuit below.
fn preflop_class(hole: [Card; 2]) -> usize {
    let (hi, lo) = if hole[0].rank >= hole[1].rank {
        (hole[0].rank.value() as usize - 2, hole[1].rank.value() as usize - 2)
    } else {
        (hole[1].rank.value() as usize - 2, hole[0].rank.value() as usize - 2)
    };
    if hole[0].suit == hole[1].suit {
        hi * 13 + lo
    } else {
        lo * 13 + hi
    }
}

fn class_representative(class: usize) -> ([Card; 2], u32) {
    let (a, b) = (class / 13, class % 13);
    let rank = |i: usize| Rank::new(i as u8 + 2).unwrap();
    if a == b {
        ([Card::new(rank(a), Suit::Spades), Card::new(rank(a), Suit::Hearts)], 6)
    } else if a > b {
        ([Card::new(rank(a), Suit::Spades), Card::new(rank(b), Suit::Spades)], 4)
    } else {
        ([Card::new(rank(b), Suit::Spades), Card::new(rank(a), Suit::Hearts)], 12)
    }
}

fn card_mask(cards: impl IntoIterator<Item = Card>) -> u64 {
    cards.into_iter().fold(0, |m, c| m | 1 << c.index())
}

impl BucketAbstraction {
    pub fn build(buckets: usize, seed: u64) -> Self {
        let rollouts = 128;
        let mut rng = SplitMix64::new(derive_seed(seed, 1));
        let preflop_strength: Vec<f64> = (0..169)
            .map(|class| {
                let (hole, _) = class_representative(class);
                strength_vs_uniform(hole, &[], PREFLOP_SAMPLES, &mut rng)
            })
            .collect();
        let mut abs = Self {
            buckets,
            rollouts,
            preflop_strength,
            thresholds: Vec::new(),
        };

        let mut preflop: Vec<(f64, u32)> = (0..169)
            .map(|class| (abs.preflop_strength[class], class_representative(class).1))
            .collect();
        preflop.sort_by(|a, b| a.0.total_cmp(&b.0));
        abs.thresholds.push(weighted_cuts(&preflop, buckets));

        let deck = DeckSpec::for_variant(Variant::Limit).cards;
        for board_len in [3usize, 4, 5] {
            let mut samples: Vec<(f64, u32)> = (0..CALIBRATION_DEALS)
                .map(|_| {
                    let mut d = deck.clone();
                    rng.shuffle(&mut d);
                    (abs.strength([d[0], d[1]], &d[2..2 + board_len]), 1)
                })
                .collect();
            samples.sort_by(|a, b| a.0.total_cmp(&b.0));
            abs.thresholds.push(weighted_cuts(&samples, buckets));
        }
        abs
    }

    /// Equity against a random holding; a pure function of the cards.
    pub fn strength(&self, hole: [Card; 2], board: &[Card]) -> f64 {
        if board.is_empty() {
            return self.preflop_strength[preflop_class(hole)];
        }
        let mask = card_mask(hole.iter().chain(board).copied());
        let mut rng = SplitMix64::new(derive_seed(STRENGTH_SEED, mask));
        strength_vs_uniform(hole, board, self.rollouts, &mut rng)
    }

    pub fn bucket(&self, hole: [Card; 2], board: &[Card]) -> usize {
        let street = match board.len() {
            0 => 0,
            3 => 1,
            4 => 2,
            _ => 3,
        };
        let s = self.strength(hole, board);
        self.thresholds[street].partition_point(|&t| t < s)
    }

    /// Buckets for rounds `0..=round` given the full board.
    pub fn bucket_path(&self, hole: [Card; 2], board: &[Card], round: usize) -> Vec<usize> {
        let structure = Variant::Limit.structure();
        (0..=round)
            .map(|r| self.bucket(hole, &board[..structure.revealed_by(r)]))
            .collect()
    }

    pub fn infoset_key(&self, obs: &Observation) -> String {
        let hole = [obs.private_cards[0], obs.private_cards[1]];
        let mut path = Vec::with_capacity(4);
        let structure = Variant::Limit.structure();
        for r in 0..=obs.round {
            path.push(self.bucket(hole, &obs.community[..structure.revealed_by(r)]));
        }
        bucket_key(&path, obs.seat(), &obs.history)
    }
}

/// `3.5|1|/rc;x`: bucket path, seat, then the betting history.
pub(crate) fn bucket_key(path: &[usize], seat: usize, history: &[Vec<crate::game::Action>]) -> String {
    let mut key = path.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(".");
    key.push('|');
    key.push_str(&seat.to_string());
    key.push('|');
    if history.iter().any(|r| !r.is_empty()) {
        key.push('/');
        key.push_str(&format_history(history));
    }
    key
}

/// Cut points splitting sorted weighted samples into `buckets` equal-mass
/// groups.
fn weighted_cuts(sorted: &[(f64, u32)], buckets: usize) -> Vec<f64> {
    let total: u64 = sorted.iter().map(|s| s.1 as u64).sum();
    let mut cuts = Vec::with_capacity(buckets.saturating_sub(1));
    let mut acc = 0u64;
    let mut k = 1;
    for &(value, w) in sorted {
        acc += w as u64;
        while k < buckets && acc * buckets as u64 >= k as u64 * total {
            cuts.push(value);
            k += 1;
        }
    }
    cuts
}
