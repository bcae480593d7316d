//! External-sampling Monte Carlo CFR.
//!
//! Each iteration deals one hand; the traverser explores all of its actions
//! while chance and the opponent are sampled. The opponent's strategy sums
//! are updated where it is sampled. On Limit Hold'em the keys are bucketed
//! through [`BucketAbstraction`], so the result is an approximation of the
//! real game.

use std::collections::{BTreeMap, HashMap};

use super::abstraction::bucket_key;
use super::tree::MAX_ACTIONS;
use super::{regret_match, BucketAbstraction, CfrError, InfosetEntry, SolveConfig, StrategyProfile};
use crate::game::{infoset_key, new_game, GameState, Variant};
use crate::rng::SplitMix64;

struct Sampler<'a> {
    config: &'a SolveConfig,
    tables: HashMap<String, InfosetEntry>,
    rng: SplitMix64,
    weight: f64,
    /// Bucket path per seat for the current deal (Limit only).
    paths: [Vec<usize>; 2],
    abstraction: Option<&'a BucketAbstraction>,
}

pub(crate) fn train(variant: Variant, config: &SolveConfig) -> Result<StrategyProfile, CfrError> {
    let abstraction = (variant == Variant::Limit).then(|| BucketAbstraction::build(config.buckets, config.seed));
    let mut s = Sampler {
        config,
        tables: HashMap::new(),
        rng: SplitMix64::new(config.seed),
        weight: 1.0,
        paths: [Vec::new(), Vec::new()],
        abstraction: abstraction.as_ref(),
    };
    for t in 1..=config.iterations {
        s.weight = config.weight(t);
        let state = new_game(variant, s.rng.next_u64());
        if let Some(abs) = s.abstraction {
            let rounds = variant.structure().rounds();
            for seat in 0..2 {
                let h = state.hole(seat);
                s.paths[seat] = abs.bucket_path([h[0], h[1]], &state.deal().board, rounds - 1);
            }
        }
        for traverser in 0..2 {
            s.traverse(&state, traverser)?;
        }
    }
    let tables = std::mem::take(&mut s.tables);
    drop(s);
    Ok(StrategyProfile {
        variant,
        algorithm: config.algorithm,
        averaging: config.averaging,
        iterations: config.iterations,
        seed: config.seed,
        abstraction,
        infosets: tables.into_iter().collect::<BTreeMap<_, _>>(),
    })
}

impl Sampler<'_> {
    fn key(&self, state: &GameState, seat: usize) -> String {
        match self.abstraction {
            Some(_) => bucket_key(&self.paths[seat][..=state.round()], seat, state.history()),
            None => infoset_key(&state.observation(seat)),
        }
    }

    fn traverse(&mut self, state: &GameState, traverser: usize) -> Result<f64, CfrError> {
        let Some(player) = state.to_act() else {
            return Ok(state.payoffs().expect("terminal")[traverser] as f64);
        };
        let actions = state.legal_actions().expect("live state");
        let key = self.key(state, player);
        if !self.tables.contains_key(&key) {
            if self.tables.len() >= self.config.max_infosets {
                return Err(CfrError::CapacityExceeded {
                    limit: self.config.max_infosets,
                });
            }
            self.tables.insert(key.clone(), InfosetEntry::new(actions.clone()));
        }
        let sigma = regret_match(&self.tables[&key].regrets)?;
        let n = actions.len();

        if player == traverser {
            let mut values = [0.0; MAX_ACTIONS];
            let mut value = 0.0;
            for a in 0..n {
                let next = state.apply_action(actions[a]).expect("legal");
                values[a] = self.traverse(&next, traverser)?;
                value += sigma[a] * values[a];
            }
            let entry = self.tables.get_mut(&key).expect("inserted above");
            for a in 0..n {
                entry.regrets[a] += values[a] - value;
            }
            Ok(value)
        } else {
            let entry = self.tables.get_mut(&key).expect("inserted above");
            for a in 0..n {
                entry.strategy_sum[a] += self.weight * sigma[a];
            }
            let a = self.rng.weighted_index(&sigma);
            let next = state.apply_action(actions[a]).expect("legal");
            self.traverse(&next, traverser)
        }
    }
}
