//! Explicit game trees for the small variants.
//!
//! The root is a chance node over deals. Leduc deals are grouped by rank
//! (suits never matter there), which leaves 24 classes instead of 120.

use std::collections::HashMap;

use crate::cards::{Card, DeckSpec};
use crate::game::{infoset_key, Action, Deal, GameState, Variant};

pub(crate) const MAX_ACTIONS: usize = 3;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Node {
    Chance { first: u32, count: u32 },
    Decision { player: u8, infoset: u32, first: u32, count: u32 },
    /// Net chips for seat 0.
    Terminal { value: f64 },
}

#[derive(Debug, Clone)]
pub(crate) struct InfosetInfo {
    pub key: String,
    pub player: u8,
    pub actions: Vec<Action>,
    pub depth: u32,
    pub nodes: Vec<u32>,
}

#[derive(Debug)]
pub(crate) struct GameTree {
    pub variant: Variant,
    pub nodes: Vec<Node>,
    /// Children of decision nodes, indexed by `first..first + count`.
    pub children: Vec<u32>,
    /// Chance outcomes as (probability, child).
    pub chance: Vec<(f64, u32)>,
    pub infosets: Vec<InfosetInfo>,
}

pub(crate) const ROOT: u32 = 0;

impl GameTree {
    /// `None` for Limit Hold'em, which is too large to enumerate.
    pub fn build(variant: Variant) -> Option<GameTree> {
        let deals = chance_deals(variant)?;
        let mut tree = GameTree {
            variant,
            nodes: vec![Node::Chance { first: 0, count: 0 }],
            children: Vec::new(),
            chance: Vec::new(),
            infosets: Vec::new(),
        };
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut outcomes = Vec::with_capacity(deals.len());
        for (p, deal) in deals {
            let state = GameState::with_deal(variant, deal).expect("enumerated deals are valid");
            let child = tree.expand(&state, 1, &mut index);
            outcomes.push((p, child));
        }
        let first = tree.chance.len() as u32;
        tree.chance.extend(outcomes);
        tree.nodes[ROOT as usize] = Node::Chance {
            first,
            count: tree.chance.len() as u32 - first,
        };
        Some(tree)
    }

    fn expand(&mut self, state: &GameState, depth: u32, index: &mut HashMap<String, u32>) -> u32 {
        let id = self.nodes.len() as u32;
        let Some(player) = state.to_act() else {
            let value = state.payoffs().expect("terminal")[0] as f64;
            self.nodes.push(Node::Terminal { value });
            return id;
        };
        self.nodes.push(Node::Terminal { value: 0.0 });
        let obs = state.observation(player);
        let key = infoset_key(&obs);
        let infoset = *index.entry(key.clone()).or_insert_with(|| {
            self.infosets.push(InfosetInfo {
                key,
                player: player as u8,
                actions: obs.legal_actions.clone(),
                depth,
                nodes: Vec::new(),
            });
            self.infosets.len() as u32 - 1
        });
        let info = &mut self.infosets[infoset as usize];
        debug_assert_eq!(info.actions, obs.legal_actions);
        debug_assert_eq!(info.depth, depth);
        info.nodes.push(id);

        let kids: Vec<u32> = obs
            .legal_actions
            .iter()
            .map(|&a| {
                let next = state.apply_action(a).expect("legal");
                self.expand(&next, depth + 1, index)
            })
            .collect();
        let first = self.children.len() as u32;
        self.children.extend(&kids);
        self.nodes[id as usize] = Node::Decision {
            player: player as u8,
            infoset,
            first,
            count: kids.len() as u32,
        };
        id
    }

    pub fn kids(&self, first: u32, count: u32) -> &[u32] {
        &self.children[first as usize..(first + count) as usize]
    }

    pub fn outcomes(&self, first: u32, count: u32) -> &[(f64, u32)] {
        &self.chance[first as usize..(first + count) as usize]
    }

    /// Offsets of each infoset's slots in flat per-action tables.
    pub fn offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.infosets.len() + 1);
        let mut at = 0;
        for info in &self.infosets {
            offsets.push(at);
            at += info.actions.len();
        }
        offsets.push(at);
        offsets
    }
}

/// Chance distribution over deals, merged by strategic equivalence.
pub(crate) fn chance_deals(variant: Variant) -> Option<Vec<(f64, Deal)>> {
    let deck = DeckSpec::for_variant(variant).cards;
    match variant {
        Variant::Kuhn => {
            let mut out = Vec::new();
            for (i, &a) in deck.iter().enumerate() {
                for (j, &b) in deck.iter().enumerate() {
                    if i != j {
                        out.push((1.0 / 6.0, deal(vec![a], vec![b], vec![])));
                    }
                }
            }
            Some(out)
        }
        Variant::Leduc => {
            let mut classes: Vec<((u8, u8, u8), usize, Deal)> = Vec::new();
            let mut total = 0usize;
            for (i, &a) in deck.iter().enumerate() {
                for (j, &b) in deck.iter().enumerate() {
                    for (k, &c) in deck.iter().enumerate() {
                        if i == j || i == k || j == k {
                            continue;
                        }
                        total += 1;
                        let class = (a.rank.value(), b.rank.value(), c.rank.value());
                        match classes.iter_mut().find(|(cl, _, _)| *cl == class) {
                            Some((_, n, _)) => *n += 1,
                            None => classes.push((class, 1, deal(vec![a], vec![b], vec![c]))),
                        }
                    }
                }
            }
            Some(
                classes
                    .into_iter()
                    .map(|(_, n, d)| (n as f64 / total as f64, d))
                    .collect(),
            )
        }
        Variant::Limit => None,
    }
}

fn deal(a: Vec<Card>, b: Vec<Card>, board: Vec<Card>) -> Deal {
    Deal {
        hole: [a, b],
        board,
        undealt: Vec::new(),
    }
}

static KUHN_TREE: std::sync::OnceLock<GameTree> = std::sync::OnceLock::new();
static LEDUC_TREE: std::sync::OnceLock<GameTree> = std::sync::OnceLock::new();

impl GameTree {
    /// Process-wide tree for the tabular variants, built on first use.
    pub fn shared(variant: Variant) -> Option<&'static GameTree> {
        match variant {
            Variant::Kuhn => Some(KUHN_TREE.get_or_init(|| GameTree::build(variant).unwrap())),
            Variant::Leduc => Some(LEDUC_TREE.get_or_init(|| GameTree::build(variant).unwrap())),
            Variant::Limit => None,
        }
    }
}
