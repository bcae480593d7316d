//! Wire types and the textual tool-call form.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::cfr::{Algorithm, StrategyProfile};
use crate::equity::HandHistogram;
use crate::game::{Observation, Position, Variant};

use super::ServiceError;

/// One solver call. Field names follow the tool signature used in
/// reasoning traces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverQuery {
    pub variant: Variant,
    pub player_card: Vec<String>,
    pub public_card: Vec<String>,
    pub my_pot: i64,
    pub opponent_pot: i64,
    pub my_raise_num: i64,
    pub opponent_raise_num: i64,
    pub legal_actions: Vec<String>,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMeta {
    pub variant: Variant,
    pub algorithm: Algorithm,
    pub iterations: u64,
    pub seed: u64,
    pub infosets: usize,
}

impl ProfileMeta {
    pub fn of(profile: &StrategyProfile) -> Self {
        Self {
            variant: profile.variant,
            algorithm: profile.algorithm,
            iterations: profile.iterations,
            seed: profile.seed,
            infosets: profile.infosets.len(),
        }
    }
}

/// Everything one call returns. Maps keep the query's `legal_actions`
/// order; `regret_rewards` is aligned with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResponse {
    pub action: String,
    pub action_dist: IndexMap<String, f64>,
    pub my_equity: f64,
    pub opponent_equity: f64,
    pub my_hand_histogram: HandHistogram,
    pub opponent_hand_histogram: HandHistogram,
    pub regret_rewards: Vec<f64>,
    /// Profile keys merged into this answer. Empty when the state is
    /// reachable but the profile never visited it (uniform answer).
    pub infosets: Vec<String>,
    pub profile: ProfileMeta,
}

impl SolverQuery {
    pub fn from_observation(obs: &Observation) -> Self {
        let codes = |cards: &[crate::cards::Card]| cards.iter().map(|c| c.to_string()).collect();
        Self {
            variant: obs.variant,
            player_card: codes(&obs.private_cards),
            public_card: codes(&obs.community),
            my_pot: obs.my_contribution as i64,
            opponent_pot: obs.opponent_contribution as i64,
            my_raise_num: obs.my_raises as i64,
            opponent_raise_num: obs.opponent_raises as i64,
            legal_actions: obs.legal_actions.iter().map(|a| a.name().to_string()).collect(),
            position: obs.position,
        }
    }

    /// `solver(player_card=['SQ'], public_card=[], my_pot=1, ...)`. The
    /// variant is implied by the game being played and is not written.
    pub fn to_tool_call(&self) -> String {
        let list = |v: &[String]| {
            let items: Vec<String> = v.iter().map(|s| format!("'{s}'")).collect();
            format!("[{}]", items.join(", "))
        };
        format!(
            "solver(player_card={}, public_card={}, my_pot={}, opponent_pot={}, my_raise_num={}, opponent_raise_num={}, legal_actions={}, position='{:?}')",
            list(&self.player_card),
            list(&self.public_card),
            self.my_pot,
            self.opponent_pot,
            self.my_raise_num,
            self.opponent_raise_num,
            list(&self.legal_actions),
            self.position,
        )
    }

    pub fn from_tool_call(text: &str, variant: Variant) -> Result<Self, ServiceError> {
        let bad = |m: &str| ServiceError::InvalidQuery(format!("tool call: {m}"));
        let inner = text
            .trim()
            .strip_prefix("solver(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| bad("expected solver(...)"))?;
        let mut fields: IndexMap<&str, &str> = IndexMap::new();
        let mut rest = inner.trim();
        while !rest.is_empty() {
            let (name, after) = rest.split_once('=').ok_or_else(|| bad("expected name=value"))?;
            let after = after.trim_start();
            let end = if after.starts_with('[') {
                after.find(']').ok_or_else(|| bad("unclosed list"))? + 1
            } else {
                after.find(',').unwrap_or(after.len())
            };
            fields.insert(name.trim(), after[..end].trim());
            rest = after[end..].trim_start().trim_start_matches(',').trim_start();
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad(&format!("missing {k}")));
        let unquote = |s: &str| s.trim().trim_matches(|c| c == '\'' || c == '"').to_string();
        let list = |k: &str| -> Result<Vec<String>, ServiceError> {
            let v = get(k)?;
            let body = v
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| bad(&format!("{k} is not a list")))?;
            Ok(body
                .split(',')
                .map(unquote)
                .filter(|s| !s.is_empty())
                .collect())
        };
        let int = |k: &str| -> Result<i64, ServiceError> {
            get(k)?.parse().map_err(|_| bad(&format!("{k} is not an integer")))
        };
        let position = match unquote(get("position")?).as_str() {
            "SB" => Position::SB,
            "BB" => Position::BB,
            other => return Err(bad(&format!("unknown position {other}"))),
        };
        if let Some(extra) = fields.keys().find(|k| {
            ![
                "player_card",
                "public_card",
                "my_pot",
                "opponent_pot",
                "my_raise_num",
                "opponent_raise_num",
                "legal_actions",
                "position",
            ]
            .contains(k)
        }) {
            return Err(bad(&format!("unknown argument {extra}")));
        }
        Ok(Self {
            variant,
            player_card: list("player_card")?,
            public_card: list("public_card")?,
            my_pot: int("my_pot")?,
            opponent_pot: int("opponent_pot")?,
            my_raise_num: int("my_raise_num")?,
            opponent_raise_num: int("opponent_raise_num")?,
            legal_actions: list("legal_actions")?,
            position,
        })
    }
}
