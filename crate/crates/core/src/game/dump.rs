use serde::{Deserialize, Serialize};

use super::key::{format_history, parse_history};
use super::{Deal, GameError, GameState, TerminalKind, Variant};

/// JSON form of a [`GameState`]. The history uses the infoset-key action
/// codes (`"cx;r"`); restoring replays it from the deal and checks every
/// other field against the replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDump {
    pub variant: Variant,
    pub deal: Deal,
    pub round: usize,
    pub pot: u32,
    pub contributions: [u32; 2],
    pub raises: Vec<[u32; 2]>,
    pub history: String,
    pub to_act: Option<usize>,
    pub terminal: Option<TerminalKind>,
}

impl From<&GameState> for StateDump {
    fn from(s: &GameState) -> Self {
        StateDump {
            variant: s.variant(),
            deal: s.deal().clone(),
            round: s.round(),
            pot: s.pot(),
            contributions: s.contributions(),
            raises: s.raises().to_vec(),
            history: format_history(s.history()),
            to_act: s.to_act(),
            terminal: s.terminal_kind(),
        }
    }
}

impl StateDump {
    pub fn restore(&self) -> Result<GameState, GameError> {
        let mut state = GameState::with_deal(self.variant, self.deal.clone())?;
        for action in parse_history(&self.history)?.into_iter().flatten() {
            state = state.apply_action(action)?;
        }
        if let Some(TerminalKind::Forfeit(seat)) = self.terminal {
            state = state.forfeit(seat)?;
        }
        let replayed = StateDump::from(&state);
        if &replayed != self {
            return Err(GameError::InconsistentDump(format!(
                "replayed {} does not match dump",
                serde_json::to_string(&replayed).unwrap_or_default()
            )));
        }
        Ok(state)
    }
}

impl GameState {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&StateDump::from(self)).expect("state dump serializes")
    }

    pub fn from_json(text: &str) -> Result<GameState, GameError> {
        let dump: StateDump = serde_json::from_str(text)
            .map_err(|e| GameError::InconsistentDump(e.to_string()))?;
        dump.restore()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{new_game, Action};

    #[test]
    fn dump_round_trip() {
        let s = new_game(Variant::Limit, 9)
            .apply_action(Action::Raise)
            .unwrap()
            .apply_action(Action::Call)
            .unwrap();
        let text = s.to_json();
        assert!(text.contains("\"history\":\"rc;\""));
        assert_eq!(GameState::from_json(&text).unwrap(), s);
    }

    #[test]
    fn tampered_dump_is_rejected() {
        let s = new_game(Variant::Leduc, 9).apply_action(Action::Call).unwrap();
        let mut dump = StateDump::from(&s);
        dump.pot = 99;
        assert!(matches!(dump.restore(), Err(GameError::InconsistentDump(_))));
    }
}
