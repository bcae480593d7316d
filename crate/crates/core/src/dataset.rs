//! Training-data pipelines.
//!
//! [`collect_action_dataset`] plays a solved profile against a uniformly
//! random opponent and keeps one [`ActionRecord`] per decision of the
//! profile's seat. Hand `i` is dealt from `derive_seed(seed, i)` and the
//! profile sits in seat `i % 2`; it plays the most likely action of its
//! average strategy. [`augment_tir`] wraps a record into a tagged
//! reasoning trace around one solver call.
//!
//! Files are JSON lines. The first line is a header naming the record
//! schema and version; every later line is one record.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::DeckSpec;
use crate::cfr::StrategyProfile;
use crate::game::{new_game, Action, Deal, GameState, Observation, Variant};
use crate::harness::{render_observation, DEFAULT_TEMPLATE};
use crate::reward::{render_trace, Segment, Tag};
use crate::rng::{derive_seed, SplitMix64};
use crate::service::{solve_query, ProfileStore, ServiceError, SolverQuery, SolverResponse};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("line {line}: {message}")]
    BadRecord { line: usize, message: String },
    #[error("solver response is for {response:?}, record is {record}")]
    ResponseMismatch { record: String, response: Vec<String> },
    #[error(transparent)]
    Service(#[from] ServiceError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub variant: Variant,
    /// Dataset seed.
    pub seed: u64,
    /// Hand index; the deal is `new_game(variant, derive_seed(seed, hand))`.
    pub hand: u64,
    pub seat: usize,
    pub prompt: String,
    pub observation: Observation,
    pub action: String,
    pub action_dist: IndexMap<String, f64>,
    pub infoset_key: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TirRecord {
    #[serde(flatten)]
    pub record: ActionRecord,
    pub tool_call: String,
    pub tool_output: String,
    pub trace: String,
}

pub trait JsonlRecord: Serialize + DeserializeOwned {
    const SCHEMA: &'static str;
}

impl JsonlRecord for ActionRecord {
    const SCHEMA: &'static str = "gtobench.action_record";
}

impl JsonlRecord for TirRecord {
    const SCHEMA: &'static str = "gtobench.tir_record";
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct Header {
    schema: String,
    version: u32,
}

/// Probabilities over `obs.legal_actions`, the chosen action (first
/// maximum) and the key. States the profile lacks are uniform.
fn decide(profile: &StrategyProfile, obs: &Observation) -> (Vec<f64>, usize, String) {
    let key = profile.key_for(obs);
    let n = obs.legal_actions.len();
    let dist = match profile.infosets.get(&key) {
        Some(e) => {
            let avg = e.average_strategy();
            obs.legal_actions
                .iter()
                .map(|a| e.actions.iter().position(|b| b == a).map_or(0.0, |j| avg[j]))
                .collect()
        }
        None => vec![1.0 / n as f64; n],
    };
    let best = (0..n).fold(0, |b, i| if dist[i] > dist[b] { i } else { b });
    (dist, best, key)
}

fn hand_records(profile: &StrategyProfile, seed: u64, hand: u64) -> Vec<ActionRecord> {
    let variant = profile.variant;
    let hand_seed = derive_seed(seed, hand);
    let seat = (hand % 2) as usize;
    let mut opponent = SplitMix64::new(derive_seed(hand_seed, 1));
    let mut state = new_game(variant, hand_seed);
    let mut out = Vec::new();
    while let Some(p) = state.to_act() {
        let obs = state.observation(p);
        let action = if p == seat {
            let (dist, best, key) = decide(profile, &obs);
            let action = obs.legal_actions[best];
            out.push(ActionRecord {
                variant,
                seed,
                hand,
                seat,
                prompt: render_observation(&obs, DEFAULT_TEMPLATE),
                action: action.name().to_string(),
                action_dist: obs
                    .legal_actions
                    .iter()
                    .zip(dist)
                    .map(|(a, p)| (a.name().to_string(), p))
                    .collect(),
                infoset_key: key,
                observation: obs,
            });
            action
        } else {
            obs.legal_actions[opponent.below(obs.legal_actions.len())]
        };
        state = state.apply_action(action).expect("legal");
    }
    out
}

/// Exactly `target` records, deterministic in `(profile, target, seed)`.
pub fn collect_action_dataset(profile: &StrategyProfile, target: usize, seed: u64) -> Vec<ActionRecord> {
    let mut out = Vec::with_capacity(target);
    let mut hand = 0;
    while out.len() < target {
        out.extend(hand_records(profile, seed, hand));
        hand += 1;
    }
    out.truncate(target);
    out
}

/// Rebuild the state a record was taken from.
pub fn replay_record(record: &ActionRecord) -> Result<GameState, crate::game::GameError> {
    let mut state = new_game(record.variant, derive_seed(record.seed, record.hand));
    for a in record.observation.history.iter().flatten() {
        state = state.apply_action(*a)?;
    }
    Ok(state)
}

fn fmt_dist(dist: &IndexMap<String, f64>) -> String {
    dist.iter()
        .map(|(a, p)| format!("{a} {p:.3}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Wrap a record around one solver call. The response must cover the
/// record's infoset.
pub fn augment_tir(record: &ActionRecord, response: &SolverResponse) -> Result<TirRecord, DatasetError> {
    if !response.infosets.is_empty() && !response.infosets.contains(&record.infoset_key) {
        return Err(DatasetError::ResponseMismatch {
            record: record.infoset_key.clone(),
            response: response.infosets.clone(),
        });
    }
    let obs = &record.observation;
    let cards = |v: &[crate::cards::Card]| {
        if v.is_empty() {
            "none".to_string()
        } else {
            v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
        }
    };
    let legal: Vec<&str> = obs.legal_actions.iter().map(|a| a.name()).collect();
    let situation = format!(
        "Position {:?}, holding {}, board {}, {} round. Pot {} ({} mine, {} theirs); raises this round {} mine, {} theirs. Legal: {}. I will ask the solver for the equilibrium strategy and equities.",
        obs.position,
        cards(&obs.private_cards),
        cards(&obs.community),
        obs.round_name(),
        obs.pot,
        obs.my_contribution,
        obs.opponent_contribution,
        obs.my_raises,
        obs.opponent_raises,
        legal.join(", "),
    );
    let tool_call = SolverQuery::from_observation(obs).to_tool_call();
    let tool_output = serde_json::to_string(response).expect("responses serialize");
    let decision = format!(
        "Equity {:.3} against {:.3}. Solver mix: {}. My strategy at this exact history: {}. I play {}.",
        response.my_equity,
        response.opponent_equity,
        fmt_dist(&response.action_dist),
        fmt_dist(&record.action_dist),
        record.action,
    );
    let trace = render_trace(&[
        Segment::new(Tag::Think, situation),
        Segment::new(Tag::Tool, tool_call.clone()),
        Segment::new(Tag::Output, tool_output.clone()),
        Segment::new(Tag::Think, decision),
        Segment::new(Tag::Answer, record.action.clone()),
    ]);
    Ok(TirRecord {
        record: record.clone(),
        tool_call,
        tool_output,
        trace,
    })
}

/// Action records plus one solver call each.
pub fn collect_tir_dataset(
    profile: &StrategyProfile,
    store: &ProfileStore,
    target: usize,
    seed: u64,
) -> Result<Vec<TirRecord>, DatasetError> {
    collect_action_dataset(profile, target, seed)
        .iter()
        .map(|r| {
            let response = solve_query(&SolverQuery::from_observation(&r.observation), store)?;
            augment_tir(r, &response)
        })
        .collect()
}

/// Infosets of the profile's seat reachable when it plays its most likely
/// action and the opponent may play anything. Kuhn and Leduc only.
pub fn reachable_infosets(profile: &StrategyProfile) -> BTreeSet<String> {
    fn walk(state: GameState, seat: usize, profile: &StrategyProfile, out: &mut BTreeSet<String>) {
        let Some(p) = state.to_act() else { return };
        let obs = state.observation(p);
        if p == seat {
            let (_, best, key) = decide(profile, &obs);
            out.insert(key);
            walk(state.apply_action(obs.legal_actions[best]).expect("legal"), seat, profile, out);
        } else {
            for a in obs.legal_actions {
                walk(state.apply_action(a).expect("legal"), seat, profile, out);
            }
        }
    }
    let variant = profile.variant;
    let s = variant.structure();
    let deck = DeckSpec::for_variant(variant).cards;
    let mut out = BTreeSet::new();
    let needed = 2 + s.board_cards();
    let mut order: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..needed {
        let mut next = Vec::new();
        for prefix in &order {
            for i in (0..deck.len()).filter(|i| !prefix.contains(i)) {
                let mut v = prefix.clone();
                v.push(i);
                next.push(v);
            }
        }
        order = next;
    }
    for idx in order {
        let deal = Deal {
            hole: [vec![deck[idx[0]]], vec![deck[idx[1]]]],
            board: idx[2..].iter().map(|&i| deck[i]).collect(),
            undealt: Vec::new(),
        };
        for seat in 0..2 {
            let root = GameState::with_deal(variant, deal.clone()).expect("valid deal");
            walk(root, seat, profile, &mut out);
        }
    }
    out
}

fn header_line<T: JsonlRecord>() -> String {
    serde_json::to_string(&Header {
        schema: T::SCHEMA.to_string(),
        version: SCHEMA_VERSION,
    })
    .expect("header serializes")
}

fn write_records<T: JsonlRecord>(out: &mut impl Write, records: &[T]) -> Result<(), DatasetError> {
    for r in records {
        serde_json::to_writer(&mut *out, r).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_jsonl<T: JsonlRecord>(path: impl AsRef<Path>, records: &[T]) -> Result<(), DatasetError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header_line::<T>())?;
    write_records(&mut out, records)?;
    out.flush()?;
    Ok(())
}

/// Append to a file, writing the header only if the file is new or empty.
/// An existing file must carry the same schema.
pub fn append_jsonl<T: JsonlRecord>(path: impl AsRef<Path>, records: &[T]) -> Result<(), DatasetError> {
    let path = path.as_ref();
    let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
    if !fresh {
        let mut first = String::new();
        BufReader::new(File::open(path)?).read_line(&mut first)?;
        check_header::<T>(&first)?;
    }
    let mut out = BufWriter::new(OpenOptions::new().create(true).append(true).open(path)?);
    if fresh {
        writeln!(out, "{}", header_line::<T>())?;
    }
    write_records(&mut out, records)?;
    out.flush()?;
    Ok(())
}

fn check_header<T: JsonlRecord>(line: &str) -> Result<(), DatasetError> {
    let header: Header = serde_json::from_str(line.trim())
        .map_err(|_| DatasetError::SchemaMismatch("first line is not a schema header".into()))?;
    if header.schema != T::SCHEMA || header.version != SCHEMA_VERSION {
        return Err(DatasetError::SchemaMismatch(format!(
            "file has {} v{}, expected {} v{}",
            header.schema,
            header.version,
            T::SCHEMA,
            SCHEMA_VERSION
        )));
    }
    Ok(())
}

pub fn read_jsonl<T: JsonlRecord>(path: impl AsRef<Path>) -> Result<Vec<T>, DatasetError> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let first = lines
        .next()
        .transpose()?
        .ok_or_else(|| DatasetError::SchemaMismatch("empty file".into()))?;
    check_header::<T>(&first)?;
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| DatasetError::BadRecord {
            line: i + 2,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

/// The action a record's trace should end with, parsed.
pub fn record_action(record: &ActionRecord) -> Option<Action> {
    record.action.parse().ok()
}
