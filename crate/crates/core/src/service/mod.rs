//! The single-call solver interface.
//!
//! A query carries only aggregates (pots, this round's raise counts,
//! position, cards), not the betting history. [`solve_query`] enumerates
//! every betting history consistent with those aggregates and merges the
//! matching information sets: strategy sums and regrets are added, so the
//! answer is the profile's own mixture over the histories it cannot tell
//! apart. Equities and histograms are against a chance-weighted opponent,
//! not one conditioned on its betting.

mod http;
mod query;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::cards::{ensure_distinct, parse_card, Card, DeckSpec};
use crate::cfr::abstraction::bucket_key;
use crate::cfr::{load_profile, CfrError, StrategyProfile};
use crate::equity::{equity_exact, equity_mc, hand_histogram, EquityResult};
use crate::game::{Action, Deal, GameState, Variant};
use crate::reward::regret_reward;

pub use http::{router, serve, BIND_ENV, BODY_LIMIT, DEFAULT_BIND};
pub use query::{ProfileMeta, SolverQuery, SolverResponse};

/// Monte Carlo samples for Limit equities. Fixed, with seed 0, so that
/// responses are reproducible.
pub const LIMIT_EQUITY_SAMPLES: u64 = 20_000;

#[derive(Debug, Error, PartialEq)]
pub enum ServiceError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("no reachable state matches the query: {0}")]
    UnknownInfoset(String),
    #[error("no profile loaded for {0}")]
    NoProfile(Variant),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::InvalidQuery(_) => "invalid_query",
            ServiceError::UnknownInfoset(_) => "unknown_infoset",
            ServiceError::NoProfile(_) => "no_profile",
        }
    }
}

/// Frozen profiles, at most one per variant.
#[derive(Debug, Default, Clone)]
pub struct ProfileStore {
    profiles: BTreeMap<Variant, Arc<StrategyProfile>>,
}

impl ProfileStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, profile: StrategyProfile) {
        self.profiles.insert(profile.variant, Arc::new(profile));
    }

    pub fn with(mut self, profile: StrategyProfile) -> Self {
        self.insert(profile);
        self
    }

    /// Load every `*.profile` file in `dir`. Two files for one variant is
    /// an error.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, CfrError> {
        let mut store = Self::new();
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "profile"))
            .collect();
        paths.sort();
        for path in paths {
            let profile = load_profile(&path)?;
            if store.profiles.contains_key(&profile.variant) {
                return Err(CfrError::InvalidConfig(format!(
                    "second {} profile at {}",
                    profile.variant,
                    path.display()
                )));
            }
            store.insert(profile);
        }
        Ok(store)
    }

    pub fn get(&self, variant: Variant) -> Option<&Arc<StrategyProfile>> {
        self.profiles.get(&variant)
    }

    pub fn metadata(&self) -> Vec<ProfileMeta> {
        self.profiles.values().map(|p| ProfileMeta::of(p)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

/// A query after validation.
#[derive(Debug, Clone)]
struct Checked {
    variant: Variant,
    seat: usize,
    hole: Vec<Card>,
    board: Vec<Card>,
    round: usize,
    pots: [u32; 2],
    raises: [u32; 2],
    legal: Vec<Action>,
}

fn invalid(msg: impl Into<String>) -> ServiceError {
    ServiceError::InvalidQuery(msg.into())
}

fn vocabulary(variant: Variant) -> &'static [Action] {
    match variant {
        Variant::Kuhn => &[Action::Check, Action::Bet, Action::Fold, Action::Call],
        _ => &[Action::Fold, Action::Check, Action::Call, Action::Raise],
    }
}

fn check_query(q: &SolverQuery) -> Result<Checked, ServiceError> {
    let variant = q.variant;
    let s = variant.structure();
    let parse = |codes: &[String]| -> Result<Vec<Card>, ServiceError> {
        codes
            .iter()
            .map(|c| parse_card(c).map_err(|e| invalid(e.to_string())))
            .collect()
    };
    let hole = parse(&q.player_card)?;
    let board = parse(&q.public_card)?;
    if hole.len() != s.hole_cards {
        return Err(invalid(format!(
            "{} needs {} player card(s), got {}",
            variant,
            s.hole_cards,
            hole.len()
        )));
    }
    let round = (0..s.rounds())
        .find(|&r| s.revealed_by(r) == board.len())
        .ok_or_else(|| invalid(format!("{} public card(s) is not a {} street", board.len(), variant)))?;
    let all: Vec<Card> = hole.iter().chain(&board).copied().collect();
    DeckSpec::for_variant(variant)
        .check(&all)
        .map_err(|e| invalid(e.to_string()))?;
    ensure_distinct(&all).map_err(|e| invalid(e.to_string()))?;
    let count = |v: i64, name: &str| -> Result<u32, ServiceError> {
        u32::try_from(v).map_err(|_| invalid(format!("{name} must be a nonnegative integer")))
    };
    let pots = [count(q.my_pot, "my_pot")?, count(q.opponent_pot, "opponent_pot")?];
    let raises = [
        count(q.my_raise_num, "my_raise_num")?,
        count(q.opponent_raise_num, "opponent_raise_num")?,
    ];
    if q.legal_actions.is_empty() {
        return Err(invalid("legal_actions is empty"));
    }
    let mut legal = Vec::new();
    for name in &q.legal_actions {
        let a: Action = name.parse().map_err(|_| invalid(format!("unknown action {name:?}")))?;
        if !vocabulary(variant).contains(&a) {
            return Err(invalid(format!("{name} is not a {variant} action")));
        }
        if legal.contains(&a) {
            return Err(invalid(format!("{name} is listed twice")));
        }
        legal.push(a);
    }
    Ok(Checked {
        variant,
        seat: q.position.seat(),
        hole,
        board,
        round,
        pots,
        raises,
        legal,
    })
}

/// A deal placing the query's cards and filling the rest from the deck.
/// Betting never depends on the filler.
fn deal_for(c: &Checked) -> Deal {
    let s = c.variant.structure();
    let known: Vec<Card> = c.hole.iter().chain(&c.board).copied().collect();
    let mut spare = DeckSpec::for_variant(c.variant).remaining(&known).into_iter();
    let mut hole: [Vec<Card>; 2] = [Vec::new(), Vec::new()];
    hole[c.seat] = c.hole.clone();
    hole[1 - c.seat] = spare.by_ref().take(s.hole_cards).collect();
    let mut board = c.board.clone();
    board.extend(spare.by_ref().take(s.board_cards() - c.board.len()));
    Deal {
        hole,
        board,
        undealt: spare.collect(),
    }
}

/// States where the queried seat is to act and the aggregates match.
fn matching_states(c: &Checked) -> Vec<GameState> {
    fn walk(state: GameState, c: &Checked, out: &mut Vec<GameState>) {
        let Some(p) = state.to_act() else { return };
        let contrib = state.contributions();
        let (mine, theirs) = (contrib[c.seat], contrib[1 - c.seat]);
        if state.round() > c.round || mine > c.pots[0] || theirs > c.pots[1] {
            return;
        }
        if state.round() == c.round && p == c.seat && mine == c.pots[0] && theirs == c.pots[1] {
            let r = state.raises()[c.round];
            let mut legal = state.legal_actions().expect("live state");
            let mut want = c.legal.clone();
            legal.sort();
            want.sort();
            if r[c.seat] == c.raises[0] && r[1 - c.seat] == c.raises[1] && legal == want {
                out.push(state.clone());
            }
        }
        for a in state.legal_actions().expect("live state") {
            if a != Action::Fold {
                walk(state.apply_action(a).expect("legal"), c, out);
            }
        }
    }
    let mut out = Vec::new();
    let root = GameState::with_deal(c.variant, deal_for(c)).expect("validated cards");
    walk(root, c, &mut out);
    out
}

fn equities(c: &Checked) -> Result<EquityResult, ServiceError> {
    let r = match c.variant {
        Variant::Limit => equity_mc(&c.hole, &c.board, None, LIMIT_EQUITY_SAMPLES, 0),
        _ => equity_exact(c.variant, &c.hole, &c.board),
    };
    r.map_err(|e| invalid(e.to_string()))
}

pub fn solve_query(query: &SolverQuery, store: &ProfileStore) -> Result<SolverResponse, ServiceError> {
    let c = check_query(query)?;
    let profile = store.get(c.variant).ok_or(ServiceError::NoProfile(c.variant))?;
    let states = matching_states(&c);
    if states.is_empty() {
        return Err(ServiceError::UnknownInfoset(format!(
            "{} at pots {}/{}, raises {}/{}",
            c.variant, c.pots[0], c.pots[1], c.raises[0], c.raises[1]
        )));
    }

    let path = profile.abstraction.as_ref().map(|abs| {
        abs.bucket_path([c.hole[0], c.hole[1]], &deal_for(&c).board, c.round)
    });
    let mut keys: Vec<String> = states
        .iter()
        .map(|s| match &path {
            Some(path) => bucket_key(path, c.seat, s.history()),
            None => profile.key_for(&s.observation(c.seat)),
        })
        .filter(|k| profile.infosets.contains_key(k))
        .collect();
    keys.sort();
    keys.dedup();

    // Probabilities and regrets in the query's action order.
    let n = c.legal.len();
    let (dist, regrets) = match keys.as_slice() {
        [] => (vec![1.0 / n as f64; n], vec![0.0; n]),
        [key] => {
            let e = &profile.infosets[key];
            let avg = e.average_strategy();
            let pick = |v: &[f64]| -> Vec<f64> {
                c.legal
                    .iter()
                    .map(|a| v[e.actions.iter().position(|b| b == a).expect("same action set")])
                    .collect()
            };
            (pick(&avg), pick(&e.regrets))
        }
        many => {
            let mut sums = vec![0.0; n];
            let mut regrets = vec![0.0; n];
            for key in many {
                let e = &profile.infosets[key];
                for (i, a) in c.legal.iter().enumerate() {
                    let j = e.actions.iter().position(|b| b == a).expect("same action set");
                    sums[i] += e.strategy_sum[j];
                    regrets[i] += e.regrets[j];
                }
            }
            let total: f64 = sums.iter().sum();
            let dist = if total > 0.0 {
                sums.iter().map(|s| s / total).collect()
            } else {
                vec![1.0 / n as f64; n]
            };
            (dist, regrets)
        }
    };

    let best = (0..n).fold(0, |b, i| if dist[i] > dist[b] { i } else { b });
    let eq = equities(&c)?;
    let (mine, theirs) = hand_histogram(c.variant, &c.hole, &c.board).map_err(|e| invalid(e.to_string()))?;
    let action_dist: IndexMap<String, f64> = c
        .legal
        .iter()
        .zip(&dist)
        .map(|(a, p)| (a.name().to_string(), *p))
        .collect();
    Ok(SolverResponse {
        action: c.legal[best].name().to_string(),
        action_dist,
        my_equity: eq.equity,
        opponent_equity: 1.0 - eq.equity,
        my_hand_histogram: mine,
        opponent_hand_histogram: theirs,
        regret_rewards: regret_reward(&regrets).expect("nonempty"),
        infosets: keys,
        profile: ProfileMeta::of(profile),
    })
}

/// [`solve_query`] then the exact bytes the HTTP service would send.
pub fn solve_to_json(query: &SolverQuery, store: &ProfileStore) -> Result<String, ServiceError> {
    solve_query(query, store).map(|r| serde_json::to_string(&r).expect("responses serialize"))
}
