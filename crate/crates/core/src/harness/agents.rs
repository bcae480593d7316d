//! Built-in agents and agent specifications.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::bridge::{CommandBridge, HttpBridge};
use super::{AgentError, GameSummary, HarnessError};
use crate::cfr::{load_profile_for, StrategyProfile};
use crate::game::{Action, Observation, Variant};
use crate::rng::{derive_seed, SplitMix64};

pub trait Agent: Send {
    fn name(&self) -> String;

    /// Called before each game. Stochastic agents reseed here from their
    /// own seed and the game seed, so a game replays identically whichever
    /// seat the agent takes.
    fn begin_game(&mut self, _game_seed: u64) {}

    /// Only invoked on the agent's turn; `obs.legal_actions` is nonempty.
    fn act(&mut self, obs: &Observation) -> Result<Action, AgentError>;

    fn end_game(&mut self, _summary: &GameSummary) {}
}

/// Uniform over legal actions.
pub struct RandomAgent {
    seed: u64,
    rng: SplitMix64,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: SplitMix64::new(seed),
        }
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> String {
        format!("random:{}", self.seed)
    }

    fn begin_game(&mut self, game_seed: u64) {
        self.rng = SplitMix64::new(derive_seed(self.seed, game_seed));
    }

    fn act(&mut self, obs: &Observation) -> Result<Action, AgentError> {
        Ok(obs.legal_actions[self.rng.below(obs.legal_actions.len())])
    }
}

/// Call when possible, else check, else the first legal action.
pub struct AlwaysCall;

impl Agent for AlwaysCall {
    fn name(&self) -> String {
        "always_call".into()
    }

    fn act(&mut self, obs: &Observation) -> Result<Action, AgentError> {
        let legal = &obs.legal_actions;
        Ok([Action::Call, Action::Check]
            .into_iter()
            .find(|a| legal.contains(a))
            .unwrap_or(legal[0]))
    }
}

/// Plays a solved profile. Unknown states are played uniformly.
pub struct CfrAgent {
    profile: Arc<StrategyProfile>,
    seed: u64,
    rng: SplitMix64,
    argmax: bool,
    label: String,
}

impl CfrAgent {
    /// Samples from the average strategy.
    pub fn new(profile: Arc<StrategyProfile>, seed: u64) -> Self {
        Self {
            profile,
            seed,
            rng: SplitMix64::new(seed),
            argmax: false,
            label: "cfr".into(),
        }
    }

    /// Always plays the most likely action (first on ties).
    pub fn argmax(profile: Arc<StrategyProfile>) -> Self {
        Self {
            argmax: true,
            label: "cfr-argmax".into(),
            ..Self::new(profile, 0)
        }
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Distribution over `obs.legal_actions`, in that order.
    pub fn policy(&self, obs: &Observation) -> Vec<f64> {
        let n = obs.legal_actions.len();
        let key = self.profile.key_for(obs);
        match self.profile.infosets.get(&key) {
            Some(e) if e.actions == obs.legal_actions => e.average_strategy(),
            _ => vec![1.0 / n as f64; n],
        }
    }
}

impl Agent for CfrAgent {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn begin_game(&mut self, game_seed: u64) {
        self.rng = SplitMix64::new(derive_seed(self.seed, game_seed));
    }

    fn act(&mut self, obs: &Observation) -> Result<Action, AgentError> {
        let p = self.policy(obs);
        let i = if self.argmax {
            (0..p.len()).fold(0, |b, i| if p[i] > p[b] { i } else { b })
        } else {
            self.rng.weighted_index(&p)
        };
        Ok(obs.legal_actions[i])
    }
}

/// How to build an agent, as written on the command line:
///
/// | form | agent |
/// |---|---|
/// | `random` or `random:SEED` | [`RandomAgent`] |
/// | `always_call` | [`AlwaysCall`] |
/// | `cfr:PATH` or `cfr:PATH@SEED` | [`CfrAgent`] sampling a profile file |
/// | `cfr-argmax:PATH` | [`CfrAgent::argmax`] |
/// | `external:cmd:COMMAND ARGS...` | subprocess speaking the bridge protocol |
/// | `external:http://HOST:PORT/PATH` | HTTP endpoint speaking the bridge protocol |
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentSpec {
    Random { seed: u64 },
    AlwaysCall,
    Cfr { profile: PathBuf, seed: u64, argmax: bool },
    ExternalCommand { command: Vec<String>, timeout_ms: u64 },
    ExternalHttp { url: String, timeout_ms: u64 },
}

pub const DEFAULT_BRIDGE_TIMEOUT_MS: u64 = 30_000;

impl FromStr for AgentSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarnessError::BadAgentSpec(s.to_string());
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "random" if arg.is_empty() => Ok(AgentSpec::Random { seed: 0 }),
            "random" => Ok(AgentSpec::Random {
                seed: arg.parse().map_err(|_| bad())?,
            }),
            "always_call" if arg.is_empty() => Ok(AgentSpec::AlwaysCall),
            "cfr" | "cfr-argmax" if !arg.is_empty() => {
                let (path, seed) = match arg.rsplit_once('@') {
                    Some((p, seed)) => (p, seed.parse().map_err(|_| bad())?),
                    None => (arg, 0),
                };
                Ok(AgentSpec::Cfr {
                    profile: PathBuf::from(path),
                    seed,
                    argmax: kind == "cfr-argmax",
                })
            }
            "external" => {
                if let Some(cmd) = arg.strip_prefix("cmd:") {
                    let command: Vec<String> = cmd.split_whitespace().map(String::from).collect();
                    if command.is_empty() {
                        return Err(bad());
                    }
                    Ok(AgentSpec::ExternalCommand {
                        command,
                        timeout_ms: DEFAULT_BRIDGE_TIMEOUT_MS,
                    })
                } else if arg.starts_with("http://") || arg.starts_with("https://") {
                    Ok(AgentSpec::ExternalHttp {
                        url: arg.to_string(),
                        timeout_ms: DEFAULT_BRIDGE_TIMEOUT_MS,
                    })
                } else {
                    Err(bad())
                }
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentSpec::Random { seed } => write!(f, "random:{seed}"),
            AgentSpec::AlwaysCall => f.write_str("always_call"),
            AgentSpec::Cfr { profile, seed, argmax } => {
                let kind = if *argmax { "cfr-argmax" } else { "cfr" };
                write!(f, "{kind}:{}@{seed}", profile.display())
            }
            AgentSpec::ExternalCommand { command, .. } => write!(f, "external:cmd:{}", command.join(" ")),
            AgentSpec::ExternalHttp { url, .. } => write!(f, "external:{url}"),
        }
    }
}

impl AgentSpec {
    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        let ms = timeout.as_millis() as u64;
        match &mut self {
            AgentSpec::ExternalCommand { timeout_ms, .. } | AgentSpec::ExternalHttp { timeout_ms, .. } => {
                *timeout_ms = ms
            }
            _ => {}
        }
        self
    }

    pub fn build(&self, variant: Variant) -> Result<Box<dyn Agent>, HarnessError> {
        let label = self.to_string();
        Ok(match self {
            AgentSpec::Random { seed } => Box::new(RandomAgent::new(*seed)),
            AgentSpec::AlwaysCall => Box::new(AlwaysCall),
            AgentSpec::Cfr { profile, seed, argmax } => {
                let p = Arc::new(load_profile_for(profile, variant)?);
                let agent = if *argmax {
                    CfrAgent::argmax(p)
                } else {
                    CfrAgent::new(p, *seed)
                };
                Box::new(agent.labelled(label))
            }
            AgentSpec::ExternalCommand { command, timeout_ms } => Box::new(CommandBridge::spawn(
                command,
                Duration::from_millis(*timeout_ms),
            )?),
            AgentSpec::ExternalHttp { url, timeout_ms } => {
                Box::new(HttpBridge::new(url, Duration::from_millis(*timeout_ms)))
            }
        })
    }
}
