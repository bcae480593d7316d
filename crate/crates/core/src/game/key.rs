//! Information-set keys.
//!
//! Grammar: `<private>|<seat>|<public>` followed, once any action has been
//! taken, by `/<round-1 codes>;<round-2 codes>...` with action codes
//! `f x c b r`. Kuhn and Leduc cards are written by rank only because suits
//! never matter in those games; Limit cards use full codes, hole cards
//! high-first. Example: Leduc seat 0 holding a king with a queen on board
//! after call/check: `K|0|Q/cx;`.

use super::{Action, GameError, Observation, Variant};
use crate::cards::Card;

pub fn infoset_key(obs: &Observation) -> String {
    let mut key = String::with_capacity(32);
    let mut private = obs.private_cards.clone();
    private.sort_by(|a, b| b.cmp(a));
    push_cards(&mut key, obs.variant, &private);
    key.push('|');
    key.push(if obs.seat() == 0 { '0' } else { '1' });
    key.push('|');
    push_cards(&mut key, obs.variant, &obs.community);
    if obs.history.iter().any(|r| !r.is_empty()) {
        key.push('/');
        key.push_str(&format_history(&obs.history));
    }
    key
}

fn push_cards(key: &mut String, variant: Variant, cards: &[Card]) {
    for c in cards {
        match variant {
            Variant::Kuhn | Variant::Leduc => key.push(c.rank.to_char()),
            Variant::Limit => key.push_str(&c.to_string()),
        }
    }
}

/// `[[c, x], [r]]` → `"cx;r"`.
pub fn format_history(history: &[Vec<Action>]) -> String {
    history
        .iter()
        .map(|round| round.iter().map(|a| a.code()).collect::<String>())
        .collect::<Vec<_>>()
        .join(";")
}

pub fn parse_history(text: &str) -> Result<Vec<Vec<Action>>, GameError> {
    text.split(';')
        .map(|round| {
            round
                .chars()
                .map(|c| Action::from_code(c).ok_or_else(|| GameError::MalformedHistory(text.to_string())))
                .collect()
        })
        .collect()
}
