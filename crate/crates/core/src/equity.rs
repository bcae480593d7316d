//! Win probabilities and hand histograms.
//!
//! Equity is `win + tie / 2`, so the two seats' equities always sum to one.
//! Kuhn and Leduc are enumerated exactly; Limit Hold'em is sampled. All
//! histograms are chance posteriors given the visible cards only: they do not
//! condition on how the opponent has bet.

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::{Card, CardError, DeckSpec};
use crate::eval::{rank_hand, showdown_unchecked, Category, Outcome};
use crate::game::Variant;
use crate::rng::{derive_seed, SplitMix64};

/// z-score of the reported two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Monte Carlo work is split into this many independently seeded shards.
const SHARDS: u64 = 16;

pub const DEFAULT_HISTOGRAM_SAMPLES: u64 = 20_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquityError {
    #[error("inconsistent cards: {0}")]
    InconsistentCards(String),
    #[error("opponent range has no weight on live holdings")]
    EmptyRange,
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("{0} is not supported for this computation")]
    UnsupportedVariant(Variant),
}

impl From<CardError> for EquityError {
    fn from(e: CardError) -> Self {
        EquityError::InconsistentCards(e.to_string())
    }
}

/// Integer outcome counts behind an exact result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub win: u64,
    pub tie: u64,
    pub lose: u64,
}

impl OutcomeCounts {
    pub fn total(&self) -> u64 {
        self.win + self.tie + self.lose
    }

    fn add(&mut self, o: Outcome) {
        match o {
            Outcome::Win => self.win += 1,
            Outcome::Tie => self.tie += 1,
            Outcome::Lose => self.lose += 1,
        }
    }

    fn merge(mut self, other: OutcomeCounts) -> OutcomeCounts {
        self.win += other.win;
        self.tie += other.tie;
        self.lose += other.lose;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquityResult {
    pub win: f64,
    pub tie: f64,
    pub lose: f64,
    pub equity: f64,
    /// 0 for exact results.
    pub samples: u64,
    /// Half-width of the 95% normal-approximation interval; 0 when exact.
    pub half_width: f64,
    pub counts: OutcomeCounts,
}

impl EquityResult {
    fn exact(counts: OutcomeCounts) -> Self {
        let mut r = Self::from_counts(counts);
        r.samples = 0;
        r.half_width = 0.0;
        r
    }

    fn from_counts(counts: OutcomeCounts) -> Self {
        let n = counts.total() as f64;
        let win = counts.win as f64 / n;
        let tie = counts.tie as f64 / n;
        let lose = counts.lose as f64 / n;
        let equity = (2 * counts.win + counts.tie) as f64 / (2.0 * n);
        // per-sample payoff is 1, 1/2 or 0
        let second_moment = win + tie / 4.0;
        let var = (second_moment - equity * equity).max(0.0);
        Self {
            win,
            tie,
            lose,
            equity,
            samples: counts.total(),
            half_width: Z95 * (var / n).sqrt(),
            counts,
        }
    }

    /// The other seat's view of the same result.
    pub fn flipped(&self) -> Self {
        let counts = OutcomeCounts {
            win: self.counts.lose,
            tie: self.counts.tie,
            lose: self.counts.win,
        };
        let mut r = Self::from_counts(counts);
        r.samples = self.samples;
        r.half_width = self.half_width;
        r.equity = 1.0 - self.equity;
        r
    }
}

/// Probability mass by label. Kuhn/Leduc labels are opponent (or own)
/// ranks `J Q K`; Limit labels are showdown categories.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HandHistogram(pub IndexMap<String, f64>);

impl HandHistogram {
    pub fn get(&self, label: &str) -> f64 {
        self.0.get(label).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Weights over specific two-card opponent holdings (Limit only). In
/// JSON: `[[["SA", "SK"], 1.0], ...]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HoldingRange {
    pub holdings: Vec<([Card; 2], f64)>,
}

fn check_small_game(variant: Variant, mine: &[Card], community: &[Card]) -> Result<DeckSpec, EquityError> {
    let s = variant.structure();
    if mine.len() != s.hole_cards {
        return Err(EquityError::InconsistentCards(format!(
            "{variant} needs {} private card(s), got {}",
            s.hole_cards,
            mine.len()
        )));
    }
    if !variant.board_sizes().contains(&community.len()) {
        return Err(EquityError::InconsistentCards(format!(
            "{} community card(s) is not a {variant} street",
            community.len()
        )));
    }
    let deck = DeckSpec::for_variant(variant);
    let seen: Vec<Card> = mine.iter().chain(community).copied().collect();
    deck.check(&seen)?;
    Ok(deck)
}

/// Exhaustive equity over every opponent card and community run-out.
pub fn equity_exact(variant: Variant, mine: &[Card], community: &[Card]) -> Result<EquityResult, EquityError> {
    if variant == Variant::Limit {
        return Err(EquityError::UnsupportedVariant(variant));
    }
    let deck = check_small_game(variant, mine, community)?;
    let board_total = variant.structure().board_cards();
    let mut counts = OutcomeCounts::default();
    let seen: Vec<Card> = mine.iter().chain(community).copied().collect();
    for &opp in &deck.remaining(&seen) {
        let mut dead = seen.clone();
        dead.push(opp);
        if community.len() == board_total {
            counts.add(showdown_unchecked(variant, mine, &[opp], community));
        } else {
            for &c in &deck.remaining(&dead) {
                counts.add(showdown_unchecked(variant, mine, &[opp], &[c]));
            }
        }
    }
    Ok(EquityResult::exact(counts))
}

/// Monte Carlo equity of a Hold'em hand against a uniform or weighted
/// opponent range. Deterministic for a given seed.
pub fn equity_mc(
    hole: &[Card],
    community: &[Card],
    range: Option<&HoldingRange>,
    samples: u64,
    seed: u64,
) -> Result<EquityResult, EquityError> {
    if samples == 0 {
        return Err(EquityError::NoSamples);
    }
    check_small_game(Variant::Limit, hole, community)?;
    let known: Vec<Card> = hole.iter().chain(community).copied().collect();
    let weighted = match range {
        Some(r) => {
            let live: Vec<([Card; 2], f64)> = r
                .holdings
                .iter()
                .filter(|(h, w)| *w > 0.0 && h[0] != h[1] && !known.contains(&h[0]) && !known.contains(&h[1]))
                .copied()
                .collect();
            if live.is_empty() {
                return Err(EquityError::EmptyRange);
            }
            Some(live)
        }
        None => None,
    };
    let hole = [hole[0], hole[1]];
    let counts = (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let n = samples / SHARDS + u64::from(shard < samples % SHARDS);
            let mut rng = SplitMix64::new(derive_seed(seed, shard));
            let mut counts = OutcomeCounts::default();
            let mut sampler = Sampler::new(&known);
            for _ in 0..n {
                let (opp, board) = match &weighted {
                    Some(live) => {
                        let weights: &Vec<([Card; 2], f64)> = live;
                        let i = pick_weighted(weights, &mut rng);
                        let opp = weights[i].0;
                        (opp, sampler.board_excluding(community, &opp, &mut rng))
                    }
                    None => sampler.opponent_and_board(community, &mut rng),
                };
                counts.add(showdown_unchecked(Variant::Limit, &hole, &opp, &board));
            }
            counts
        })
        .reduce(OutcomeCounts::default, OutcomeCounts::merge);
    Ok(EquityResult::from_counts(counts))
}

fn pick_weighted(live: &[([Card; 2], f64)], rng: &mut SplitMix64) -> usize {
    let total: f64 = live.iter().map(|(_, w)| w).sum();
    let mut target = rng.next_f64() * total;
    for (i, (_, w)) in live.iter().enumerate() {
        if target < *w {
            return i;
        }
        target -= w;
    }
    live.len() - 1
}

/// Partial-shuffle sampler over the live deck.
struct Sampler {
    live: Vec<Card>,
}

impl Sampler {
    fn new(known: &[Card]) -> Self {
        Self {
            live: DeckSpec::for_variant(Variant::Limit).remaining(known),
        }
    }

    fn draw(&mut self, k: usize, rng: &mut SplitMix64) -> &[Card] {
        let n = self.live.len();
        for i in 0..k {
            let j = i + rng.below(n - i);
            self.live.swap(i, j);
        }
        &self.live[..k]
    }

    fn opponent_and_board(&mut self, community: &[Card], rng: &mut SplitMix64) -> ([Card; 2], [Card; 5]) {
        let missing = 5 - community.len();
        let drawn = self.draw(2 + missing, rng);
        let opp = [drawn[0], drawn[1]];
        let mut board = [drawn[0]; 5];
        board[..community.len()].copy_from_slice(community);
        board[community.len()..].copy_from_slice(&drawn[2..]);
        (opp, board)
    }

    fn board_excluding(&mut self, community: &[Card], opp: &[Card; 2], rng: &mut SplitMix64) -> [Card; 5] {
        let mut board = [opp[0]; 5];
        board[..community.len()].copy_from_slice(community);
        let mut filled = community.len();
        let n = self.live.len();
        let mut i = 0;
        while filled < 5 {
            let j = i + rng.below(n - i);
            self.live.swap(i, j);
            let c = self.live[i];
            i += 1;
            if c != opp[0] && c != opp[1] {
                board[filled] = c;
                filled += 1;
            }
        }
        board
    }
}

/// Equity against a uniformly random holding, sampled with `rollouts`
/// draws; exact when the board is complete. Used for bucketing.
pub(crate) fn strength_vs_uniform(hole: [Card; 2], community: &[Card], rollouts: u32, rng: &mut SplitMix64) -> f64 {
    let known: Vec<Card> = hole.iter().chain(community).copied().collect();
    let mut sampler = Sampler::new(&known);
    let mut score = 0u64;
    let mut n = 0u64;
    if community.len() == 5 {
        let mut mine = [hole[0]; 7];
        mine[1] = hole[1];
        mine[2..].copy_from_slice(community);
        let my_rank = rank_hand(&mine);
        let live = &sampler.live;
        for i in 0..live.len() {
            for j in i + 1..live.len() {
                let mut theirs = mine;
                theirs[0] = live[i];
                theirs[1] = live[j];
                score += match my_rank.cmp(&rank_hand(&theirs)) {
                    std::cmp::Ordering::Greater => 2,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Less => 0,
                };
                n += 1;
            }
        }
    } else {
        for _ in 0..rollouts {
            let (opp, board) = sampler.opponent_and_board(community, rng);
            score += match showdown_unchecked(Variant::Limit, &hole, &opp, &board) {
                Outcome::Win => 2,
                Outcome::Tie => 1,
                Outcome::Lose => 0,
            };
            n += 1;
        }
    }
    score as f64 / (2 * n) as f64
}

fn rank_labels() -> [&'static str; 3] {
    ["J", "Q", "K"]
}

/// Histograms for both seats, seen from `mine`'s side. Limit uses
/// [`DEFAULT_HISTOGRAM_SAMPLES`] samples with seed 0.
pub fn hand_histogram(
    variant: Variant,
    mine: &[Card],
    community: &[Card],
) -> Result<(HandHistogram, HandHistogram), EquityError> {
    hand_histogram_with(variant, mine, community, DEFAULT_HISTOGRAM_SAMPLES, 0)
}

pub fn hand_histogram_with(
    variant: Variant,
    mine: &[Card],
    community: &[Card],
    samples: u64,
    seed: u64,
) -> Result<(HandHistogram, HandHistogram), EquityError> {
    let deck = check_small_game(variant, mine, community)?;
    match variant {
        Variant::Kuhn | Variant::Leduc => {
            let seen: Vec<Card> = mine.iter().chain(community).copied().collect();
            let live = deck.remaining(&seen);
            let mut my_hist = IndexMap::new();
            let mut opp_hist = IndexMap::new();
            for label in rank_labels() {
                let holds = |c: &Card| c.rank.to_char().to_string() == label;
                let n = live.iter().filter(|c| holds(c)).count();
                opp_hist.insert(label.to_string(), n as f64 / live.len() as f64);
                my_hist.insert(label.to_string(), if holds(&mine[0]) { 1.0 } else { 0.0 });
            }
            Ok((HandHistogram(my_hist), HandHistogram(opp_hist)))
        }
        Variant::Limit => {
            if samples == 0 {
                return Err(EquityError::NoSamples);
            }
            let hole = [mine[0], mine[1]];
            let (mine_counts, opp_counts, total) = if community.len() == 5 {
                category_counts_exact(hole, community)
            } else {
                category_counts_mc(hole, community, samples, seed)
            };
            let to_hist = |counts: [u64; 9]| {
                HandHistogram(
                    Category::ALL
                        .iter()
                        .map(|c| (c.name().to_string(), counts[*c as usize] as f64 / total as f64))
                        .collect(),
                )
            };
            Ok((to_hist(mine_counts), to_hist(opp_counts)))
        }
    }
}

fn seven(hole: [Card; 2], board: &[Card]) -> [Card; 7] {
    let mut h = [hole[0]; 7];
    h[1] = hole[1];
    h[2..].copy_from_slice(board);
    h
}

fn category_counts_exact(hole: [Card; 2], board: &[Card]) -> ([u64; 9], [u64; 9], u64) {
    let known: Vec<Card> = hole.iter().chain(board).copied().collect();
    let live = DeckSpec::for_variant(Variant::Limit).remaining(&known);
    let mut mine = [0u64; 9];
    let mut opp = [0u64; 9];
    let my_cat = rank_hand(&seven(hole, board)).category;
    let mut total = 0;
    for i in 0..live.len() {
        for j in i + 1..live.len() {
            opp[rank_hand(&seven([live[i], live[j]], board)).category as usize] += 1;
            mine[my_cat as usize] += 1;
            total += 1;
        }
    }
    (mine, opp, total)
}

fn category_counts_mc(hole: [Card; 2], community: &[Card], samples: u64, seed: u64) -> ([u64; 9], [u64; 9], u64) {
    let known: Vec<Card> = hole.iter().chain(community).copied().collect();
    (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let n = samples / SHARDS + u64::from(shard < samples % SHARDS);
            let mut rng = SplitMix64::new(derive_seed(seed, shard));
            let mut sampler = Sampler::new(&known);
            let mut mine = [0u64; 9];
            let mut opp = [0u64; 9];
            for _ in 0..n {
                let (o, board) = sampler.opponent_and_board(community, &mut rng);
                mine[rank_hand(&seven(hole, &board)).category as usize] += 1;
                opp[rank_hand(&seven(o, &board)).category as usize] += 1;
            }
            (mine, opp, n)
        })
        .reduce(
            || ([0; 9], [0; 9], 0),
            |mut a, b| {
                for i in 0..9 {
                    a.0[i] += b.0[i];
                    a.1[i] += b.1[i];
                }
                a.2 += b.2;
                a
            },
        )
}
