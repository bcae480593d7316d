//! Paired-seed matches between two agents.
//!
//! Every seed is played twice on the same deal: first with agent A in the
//! small blind, then with the seats swapped. Stacks reset to the starting
//! stack each hand. An agent that errors, times out or picks an illegal
//! action forfeits the hand as if it had folded.

mod agents;
pub mod bridge;
mod render;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cfr::CfrError;
use crate::game::{format_history, new_game, Action, GameState, Position, TerminalKind, Variant};
use crate::rng::SplitMix64;

pub use agents::{Agent, AgentSpec, AlwaysCall, CfrAgent, RandomAgent, DEFAULT_BRIDGE_TIMEOUT_MS};
pub use render::{render_observation, DEFAULT_TEMPLATE};

pub const DEFAULT_SEED_COUNT: usize = 50;
const BOOTSTRAP_RESAMPLES: usize = 2_000;
const BOOTSTRAP_SEED: u64 = 0xB007;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("agent crashed: {0}")]
    Crashed(String),
    #[error("agent did not answer within {0:?}")]
    Timeout(Duration),
    #[error("protocol violation: {0}")]
    Protocol(String),
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("a match needs at least one seed")]
    NoSeeds,
    #[error("cannot parse agent spec {0:?}")]
    BadAgentSpec(String),
    #[error(transparent)]
    Profile(#[from] CfrError),
    #[error("bridge: {0}")]
    Bridge(String),
}

/// What an agent is told when a game ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSummary {
    pub game_seed: u64,
    pub seat: usize,
    pub payoff: i64,
    pub history: String,
    pub forfeit: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentId {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Incident {
    Illegal,
    Crash,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub agent: AgentId,
    pub position: Position,
    /// The action taken; absent when the agent forfeited.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Action>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub incident: Option<Incident>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub seed: u64,
    /// 0 when agent A holds the small blind, 1 after the swap.
    pub pass: u8,
    pub a_position: Position,
    pub transcript: Vec<TranscriptEntry>,
    /// Betting in infoset-key codes, e.g. `rc;x`.
    pub history: String,
    pub terminal: TerminalKind,
    /// Net chips for [A, B].
    pub net: [i64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IncidentCounts {
    pub illegal: u32,
    pub crash: u32,
    pub timeout: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub variant: Variant,
    pub agent_a: String,
    pub agent_b: String,
    pub seeds: Vec<u64>,
    pub games_played: usize,
    /// Aggregate net chips for [A, B].
    pub net: [i64; 2],
    pub mean_net_a: f64,
    /// Bootstrap standard error of A's aggregate net, resampling seeds
    /// (each seed's two games stay together).
    pub net_a_se: f64,
    pub incidents: [IncidentCounts; 2],
    pub games: Vec<GameRecord>,
}

fn play_game(
    variant: Variant,
    seed: u64,
    pass: u8,
    agents: [&mut dyn Agent; 2],
) -> GameRecord {
    // seats[s] is the agent index sitting in seat s.
    let seats: [usize; 2] = if pass == 0 { [0, 1] } else { [1, 0] };
    let mut agents = agents;
    for a in agents.iter_mut() {
        a.begin_game(seed);
    }
    let mut state: GameState = new_game(variant, seed);
    let mut transcript = Vec::new();
    let mut forfeit = None;
    while let Some(seat) = state.to_act() {
        let who = seats[seat];
        let obs = state.observation(seat);
        let mut entry = TranscriptEntry {
            agent: if who == 0 { AgentId::A } else { AgentId::B },
            position: Position::from_seat(seat),
            action: None,
            incident: None,
            detail: None,
        };
        let outcome = match agents[who].act(&obs) {
            Ok(a) if obs.legal_actions.contains(&a) => Ok(a),
            Ok(a) => Err((Incident::Illegal, format!("{} is not legal", a.name()))),
            Err(e @ AgentError::Timeout(_)) => Err((Incident::Timeout, e.to_string())),
            Err(AgentError::Protocol(m)) => Err((Incident::Illegal, m)),
            Err(e @ AgentError::Crashed(_)) => Err((Incident::Crash, e.to_string())),
        };
        match outcome {
            Ok(a) => {
                entry.action = Some(a);
                state = state.apply_action(a).expect("checked legal");
            }
            Err((incident, detail)) => {
                entry.incident = Some(incident);
                forfeit = Some(detail.clone());
                entry.detail = Some(detail);
                state = state.forfeit(seat).expect("live state");
            }
        }
        transcript.push(entry);
    }
    let payoffs = state.payoffs().expect("terminal");
    let history = format_history(state.history());
    for seat in 0..2 {
        agents[seats[seat]].end_game(&GameSummary {
            game_seed: seed,
            seat,
            payoff: payoffs[seat],
            history: history.clone(),
            forfeit: forfeit.clone(),
        });
    }
    let mut net = [0; 2];
    for seat in 0..2 {
        net[seats[seat]] = payoffs[seat];
    }
    GameRecord {
        seed,
        pass,
        a_position: Position::from_seat(seats.iter().position(|&w| w == 0).expect("A is seated")),
        transcript,
        history,
        terminal: state.terminal_kind().expect("terminal"),
        net,
    }
}

/// Play every seed twice with seats swapped. Games run in seed order.
pub fn run_match(
    a: &mut dyn Agent,
    b: &mut dyn Agent,
    variant: Variant,
    seeds: &[u64],
) -> Result<MatchReport, HarnessError> {
    if seeds.is_empty() {
        return Err(HarnessError::NoSeeds);
    }
    let mut games = Vec::with_capacity(2 * seeds.len());
    for &seed in seeds {
        for pass in 0..2 {
            games.push(play_game(variant, seed, pass, [&mut *a, &mut *b]));
        }
    }
    let mut incidents = [IncidentCounts::default(); 2];
    for g in &games {
        for e in &g.transcript {
            let c = &mut incidents[if e.agent == AgentId::A { 0 } else { 1 }];
            match e.incident {
                Some(Incident::Illegal) => c.illegal += 1,
                Some(Incident::Crash) => c.crash += 1,
                Some(Incident::Timeout) => c.timeout += 1,
                None => {}
            }
        }
    }
    let net_a: i64 = games.iter().map(|g| g.net[0]).sum();
    let pair_nets: Vec<f64> = games.chunks(2).map(|p| (p[0].net[0] + p[1].net[0]) as f64).collect();
    Ok(MatchReport {
        variant,
        agent_a: a.name(),
        agent_b: b.name(),
        seeds: seeds.to_vec(),
        games_played: games.len(),
        net: [net_a, -net_a],
        mean_net_a: net_a as f64 / games.len() as f64,
        net_a_se: bootstrap_se_of_sum(&pair_nets, BOOTSTRAP_RESAMPLES, BOOTSTRAP_SEED),
        incidents,
        games,
    })
}

/// Bootstrap standard error of `sum(values)`.
pub fn bootstrap_se_of_sum(values: &[f64], resamples: usize, seed: u64) -> f64 {
    let n = values.len();
    if n < 2 || resamples < 2 {
        return 0.0;
    }
    let mut rng = SplitMix64::new(seed);
    let sums: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.below(n)]).sum())
        .collect();
    let mean = sums.iter().sum::<f64>() / resamples as f64;
    let var = sums.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    var.sqrt()
}

/// `count` seeds derived from `root`.
pub fn default_seeds(count: usize, root: u64) -> Vec<u64> {
    (0..count as u64).map(|i| crate::rng::derive_seed(root, i)).collect()
}

/// Replay a record through the engine; returns the net for [A, B].
pub fn replay_record(variant: Variant, record: &GameRecord) -> Result<[i64; 2], crate::game::GameError> {
    let mut state = new_game(variant, record.seed);
    for e in &record.transcript {
        let seat = e.position.seat();
        state = match e.action {
            Some(a) => state.apply_action(a)?,
            None => state.forfeit(seat)?,
        };
    }
    let p = state.payoffs()?;
    let a_seat = record.a_position.seat();
    Ok([p[a_seat], p[1 - a_seat]])
}
