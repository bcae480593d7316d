use std::collections::BTreeMap;

use super::tree::{GameTree, Node, MAX_ACTIONS, ROOT};
use super::{Algorithm, CfrError, InfosetEntry, SolveConfig, StrategyProfile};
use crate::game::Variant;

/// Full-tree CFR / CFR+ with alternating player updates.
///
/// One iteration runs a traversal for seat 0 and then for seat 1. Each
/// traversal reads a current strategy frozen at its start, adds the
/// instantaneous counterfactual regret `π₋ᵢ(h)·(v(h·a) − v(h))` to the
/// traverser's regrets and `w·πᵢ(h)·σ(a)` to its strategy sums, where `w` is
/// the iteration index under linear averaging and 1 otherwise. CFR+ clamps
/// regrets at zero after every traversal.
pub struct TabularTrainer {
    tree: &'static GameTree,
    config: SolveConfig,
    offsets: Vec<usize>,
    regrets: Vec<f64>,
    strategy_sum: Vec<f64>,
    current: Vec<f64>,
    iteration: u64,
}

impl TabularTrainer {
    pub fn new(variant: Variant, config: SolveConfig) -> Result<Self, CfrError> {
        if config.algorithm == Algorithm::MccfrExternal {
            return Err(CfrError::UnsupportedCombination {
                variant,
                algorithm: config.algorithm,
            });
        }
        let tree = GameTree::shared(variant).ok_or(CfrError::UnsupportedCombination {
            variant,
            algorithm: config.algorithm,
        })?;
        if tree.infosets.len() > config.max_infosets {
            return Err(CfrError::CapacityExceeded {
                limit: config.max_infosets,
            });
        }
        let offsets = tree.offsets();
        let slots = *offsets.last().unwrap();
        Ok(Self {
            tree,
            config,
            offsets,
            regrets: vec![0.0; slots],
            strategy_sum: vec![0.0; slots],
            current: vec![0.0; slots],
            iteration: 0,
        })
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn run(&mut self, iterations: u64) {
        for _ in 0..iterations {
            self.iterate();
        }
    }

    pub fn iterate(&mut self) {
        self.iteration += 1;
        let weight = self.config.weight(self.iteration);
        for traverser in 0..2u8 {
            self.refresh_current();
            let mut pass = Pass {
                tree: self.tree,
                offsets: &self.offsets,
                current: &self.current,
                regrets: &mut self.regrets,
                strategy_sum: &mut self.strategy_sum,
                traverser,
                weight,
            };
            pass.traverse(ROOT, 1.0, 1.0);
            if self.config.algorithm == Algorithm::CfrPlus {
                for r in &mut self.regrets {
                    *r = r.max(0.0);
                }
            }
        }
    }

    fn refresh_current(&mut self) {
        for w in self.offsets.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let regrets = &self.regrets[lo..hi];
            let positive: f64 = regrets.iter().map(|r| r.max(0.0)).sum();
            let uniform = 1.0 / (hi - lo) as f64;
            for (c, r) in self.current[lo..hi].iter_mut().zip(regrets) {
                *c = if positive > 0.0 { r.max(0.0) / positive } else { uniform };
            }
        }
    }

    pub fn profile(&self) -> StrategyProfile {
        let infosets: BTreeMap<String, InfosetEntry> = self
            .tree
            .infosets
            .iter()
            .zip(self.offsets.windows(2))
            .map(|(info, w)| {
                let entry = InfosetEntry {
                    actions: info.actions.clone(),
                    regrets: self.regrets[w[0]..w[1]].to_vec(),
                    strategy_sum: self.strategy_sum[w[0]..w[1]].to_vec(),
                };
                (info.key.clone(), entry)
            })
            .collect();
        StrategyProfile {
            variant: self.tree.variant,
            algorithm: self.config.algorithm,
            averaging: self.config.averaging,
            iterations: self.iteration,
            seed: self.config.seed,
            abstraction: None,
            infosets,
        }
    }
}

struct Pass<'a> {
    tree: &'a GameTree,
    offsets: &'a [usize],
    current: &'a [f64],
    regrets: &'a mut [f64],
    strategy_sum: &'a mut [f64],
    traverser: u8,
    weight: f64,
}

impl Pass<'_> {
    /// Expected value for the traverser at `node`.
    fn traverse(&mut self, node: u32, reach_self: f64, reach_other: f64) -> f64 {
        let tree = self.tree;
        match tree.nodes[node as usize] {
            Node::Terminal { value } => {
                if self.traverser == 0 {
                    value
                } else {
                    -value
                }
            }
            Node::Chance { first, count } => tree
                .outcomes(first, count)
                .iter()
                .map(|&(p, child)| p * self.traverse(child, reach_self, reach_other * p))
                .sum(),
            Node::Decision { player, infoset, first, count } => {
                let kids = tree.kids(first, count);
                let base = self.offsets[infoset as usize];
                let n = kids.len();
                let current = self.current;
                let sigma = &current[base..base + n];
                if player == self.traverser {
                    let mut values = [0.0; MAX_ACTIONS];
                    let mut value = 0.0;
                    for a in 0..n {
                        values[a] = self.traverse(kids[a], reach_self * sigma[a], reach_other);
                        value += sigma[a] * values[a];
                    }
                    for a in 0..n {
                        self.regrets[base + a] += reach_other * (values[a] - value);
                        self.strategy_sum[base + a] += self.weight * reach_self * sigma[a];
                    }
                    value
                } else {
                    let mut value = 0.0;
                    for a in 0..n {
                        let reach = reach_other * sigma[a];
                        if reach > 0.0 || reach_self > 0.0 {
                            value += sigma[a] * self.traverse(kids[a], reach_self, reach);
                        }
                    }
                    value
                }
            }
        }
    }
}
