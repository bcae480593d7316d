//! Observation text for text-driven agents.

use crate::game::{Observation, Variant, STARTING_STACK};

/// Placeholders: `{game}`, `{stack}`, `{position}`, `{holding}`,
/// `{community}`, `{round}`, `{pot}`, `{my_pot}`, `{opponent_pot}`,
/// `{my_raises}`, `{opponent_raises}`, `{history}`, `{legal_actions}`.
/// Anything else is left as written.
pub const DEFAULT_TEMPLATE: &str = "\
You are playing heads-up {game}. Each hand starts with {stack} chips per player.
Your position: {position}
Your cards: {holding}
Community cards: {community}
Current betting round: {round}
Current pot: {pot} chips
Your chips in the pot: {my_pot}; opponent's: {opponent_pot}
Raises this round: you {my_raises}, opponent {opponent_raises}
Betting so far: {history}
Legal actions:
{legal_actions}
Reply with exactly one legal action.";

fn history_text(obs: &Observation) -> String {
    let s = obs.variant.structure();
    let rounds: Vec<String> = obs
        .history
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.is_empty())
        .map(|(i, r)| {
            let names: Vec<&str> = r.iter().map(|a| a.name()).collect();
            format!("{}: {}", s.round_name(i), names.join(", "))
        })
        .collect();
    if rounds.is_empty() {
        "none".into()
    } else {
        rounds.join("; ")
    }
}

pub fn render_observation(obs: &Observation, template: &str) -> String {
    let cards = |v: &[crate::cards::Card]| v.iter().map(|c| c.long_name()).collect::<Vec<_>>().join(", ");
    let community = if obs.community.is_empty() {
        "not yet revealed".to_string()
    } else {
        cards(&obs.community)
    };
    let legal: Vec<String> = obs.legal_actions.iter().map(|a| format!("  {}", a.name())).collect();
    let game = match obs.variant {
        Variant::Kuhn => "Kuhn poker",
        Variant::Leduc => "Leduc Hold'em",
        Variant::Limit => "Limit Texas Hold'em",
    };
    let fields: [(&str, String); 13] = [
        ("{game}", game.to_string()),
        ("{stack}", STARTING_STACK.to_string()),
        ("{position}", obs.position.long_name().to_string()),
        ("{holding}", cards(&obs.private_cards)),
        ("{community}", community),
        ("{round}", obs.round_name().to_string()),
        ("{pot}", obs.pot.to_string()),
        ("{my_pot}", obs.my_contribution.to_string()),
        ("{opponent_pot}", obs.opponent_contribution.to_string()),
        ("{my_raises}", obs.my_raises.to_string()),
        ("{opponent_raises}", obs.opponent_raises.to_string()),
        ("{history}", history_text(obs)),
        ("{legal_actions}", legal.join("\n")),
    ];
    // Single pass so substituted text is never re-scanned.
    let mut out = String::with_capacity(template.len() + 256);
    let mut rest = template;
    'scan: while let Some(i) = rest.find('{') {
        out.push_str(&rest[..i]);
        rest = &rest[i..];
        for (name, value) in &fields {
            if let Some(after) = rest.strip_prefix(name) {
                out.push_str(value);
                rest = after;
                continue 'scan;
            }
        }
        out.push('{');
        rest = &rest[1..];
    }
    out.push_str(rest);
    out
}
