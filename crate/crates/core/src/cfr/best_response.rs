//! Exact best responses over the full tree of the tabular variants.

use super::tree::{GameTree, Node, ROOT};
use super::{CfrError, StrategyProfile};

/// Average-strategy table aligned with the tree's infosets.
fn strategy_table(tree: &GameTree, profile: &StrategyProfile) -> Result<Vec<Vec<f64>>, CfrError> {
    tree.infosets
        .iter()
        .map(|info| {
            let entry = profile
                .infosets
                .get(&info.key)
                .ok_or_else(|| CfrError::IncompleteProfile(info.key.clone()))?;
            if entry.actions != info.actions {
                return Err(CfrError::IncompleteProfile(info.key.clone()));
            }
            Ok(entry.average_strategy())
        })
        .collect()
}

fn tree_for(profile: &StrategyProfile) -> Result<&'static GameTree, CfrError> {
    GameTree::shared(profile.variant).ok_or(CfrError::UnsupportedCombination {
        variant: profile.variant,
        algorithm: profile.algorithm,
    })
}

/// Expected chips per hand for `responder` playing a best response against
/// the profile's average strategy for the other seat.
pub fn best_response_value(profile: &StrategyProfile, responder: usize) -> Result<f64, CfrError> {
    let tree = tree_for(profile)?;
    let sigma = strategy_table(tree, profile)?;
    Ok(BestResponse::new(tree, &sigma, responder as u8).solve())
}

/// Expected chips per hand for seat 0 when both seats play the average
/// strategy.
pub fn expected_value(profile: &StrategyProfile) -> Result<f64, CfrError> {
    let tree = tree_for(profile)?;
    let sigma = strategy_table(tree, profile)?;
    Ok(on_policy_value(tree, &sigma, ROOT))
}

/// Mean best-response gain over both seats. The game is zero-sum, so this
/// is zero exactly at a Nash equilibrium.
pub fn exploitability(profile: &StrategyProfile) -> Result<f64, CfrError> {
    let tree = tree_for(profile)?;
    let sigma = strategy_table(tree, profile)?;
    let br0 = BestResponse::new(tree, &sigma, 0).solve();
    let br1 = BestResponse::new(tree, &sigma, 1).solve();
    Ok((br0 + br1) / 2.0)
}

fn on_policy_value(tree: &GameTree, sigma: &[Vec<f64>], node: u32) -> f64 {
    match tree.nodes[node as usize] {
        Node::Terminal { value } => value,
        Node::Chance { first, count } => tree
            .outcomes(first, count)
            .iter()
            .map(|&(p, c)| p * on_policy_value(tree, sigma, c))
            .sum(),
        Node::Decision { infoset, first, count, .. } => tree
            .kids(first, count)
            .iter()
            .zip(&sigma[infoset as usize])
            .map(|(&c, &p)| p * on_policy_value(tree, sigma, c))
            .sum(),
    }
}

struct BestResponse<'a> {
    tree: &'a GameTree,
    sigma: &'a [Vec<f64>],
    responder: u8,
    /// Opponent-and-chance reach of each node.
    reach: Vec<f64>,
    value: Vec<Option<f64>>,
    choice: Vec<Option<usize>>,
}

impl<'a> BestResponse<'a> {
    fn new(tree: &'a GameTree, sigma: &'a [Vec<f64>], responder: u8) -> Self {
        let n = tree.nodes.len();
        let mut br = Self {
            tree,
            sigma,
            responder,
            reach: vec![0.0; n],
            value: vec![None; n],
            choice: vec![None; tree.infosets.len()],
        };
        br.fill_reach(ROOT, 1.0);
        br
    }

    fn fill_reach(&mut self, node: u32, reach: f64) {
        self.reach[node as usize] = reach;
        match self.tree.nodes[node as usize] {
            Node::Terminal { .. } => {}
            Node::Chance { first, count } => {
                for &(p, c) in self.tree.outcomes(first, count) {
                    self.fill_reach(c, reach * p);
                }
            }
            Node::Decision { player, infoset, first, count } => {
                for (a, &c) in self.tree.kids(first, count).iter().enumerate() {
                    let p = if player == self.responder {
                        1.0
                    } else {
                        self.sigma[infoset as usize][a]
                    };
                    self.fill_reach(c, reach * p);
                }
            }
        }
    }

    fn solve(mut self) -> f64 {
        // Deeper infosets first: with perfect recall every infoset below a
        // node of `I` is strictly deeper than `I`.
        let mut order: Vec<usize> = (0..self.tree.infosets.len())
            .filter(|&i| self.tree.infosets[i].player == self.responder)
            .collect();
        order.sort_by_key(|&i| std::cmp::Reverse(self.tree.infosets[i].depth));
        for i in order {
            let info = &self.tree.infosets[i];
            let mut totals = vec![0.0; info.actions.len()];
            for &h in &info.nodes {
                let w = self.reach[h as usize];
                let Node::Decision { first, count, .. } = self.tree.nodes[h as usize] else {
                    unreachable!("infoset nodes are decisions")
                };
                for (a, &c) in self.tree.kids(first, count).iter().enumerate() {
                    totals[a] += w * self.node_value(c);
                }
            }
            // first maximal action wins ties
            let best = totals
                .iter()
                .enumerate()
                .fold(0, |best, (a, &v)| if v > totals[best] { a } else { best });
            self.choice[i] = Some(best);
        }
        self.node_value(ROOT)
    }

    fn node_value(&mut self, node: u32) -> f64 {
        if let Some(v) = self.value[node as usize] {
            return v;
        }
        let v = match self.tree.nodes[node as usize] {
            Node::Terminal { value } => {
                if self.responder == 0 {
                    value
                } else {
                    -value
                }
            }
            Node::Chance { first, count } => {
                let mut v = 0.0;
                for &(p, c) in self.tree.outcomes(first, count) {
                    v += p * self.node_value(c);
                }
                v
            }
            Node::Decision { player, infoset, first, count } => {
                let kids = self.tree.kids(first, count);
                if player == self.responder {
                    let a = self.choice[infoset as usize].expect("deeper infosets decided first");
                    self.node_value(kids[a])
                } else {
                    let mut v = 0.0;
                    for (a, &c) in kids.iter().enumerate() {
                        let p = self.sigma[infoset as usize][a];
                        if p > 0.0 {
                            v += p * self.node_value(c);
                        }
                    }
                    v
                }
            }
        };
        self.value[node as usize] = Some(v);
        v
    }
}
