//! Counterfactual regret minimization.
//!
//! Kuhn and Leduc are solved over the full game tree with vanilla CFR or
//! CFR+ ([`train`]); any variant can be trained with external-sampling Monte
//! Carlo CFR, which is the only option for Limit Hold'em and runs there over
//! a hand-strength bucketing ([`BucketAbstraction`]). Trained
//! [`StrategyProfile`]s are plain data and can be shared across threads.

pub(crate) mod abstraction;
mod best_response;
mod container;
mod mccfr;
mod tabular;
mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{infoset_key, Action, Observation, Variant};

pub use abstraction::BucketAbstraction;
pub use best_response::{best_response_value, expected_value, exploitability};
pub use container::{
    decode_profile, encode_profile, load_profile, load_profile_for, save_profile, PROFILE_MAGIC,
    PROFILE_VERSION,
};
pub use tabular::TabularTrainer;

#[derive(Debug, Error)]
pub enum CfrError {
    #[error("regret vector is empty")]
    EmptyVector,
    #[error("{algorithm} cannot solve {variant}")]
    UnsupportedCombination { variant: Variant, algorithm: Algorithm },
    #[error("invalid solve config: {0}")]
    InvalidConfig(String),
    #[error("table would exceed {limit} information sets")]
    CapacityExceeded { limit: usize },
    #[error("unknown information set {0:?}")]
    UnknownInfoset(String),
    #[error("profile has no entry for information set {0:?}")]
    IncompleteProfile(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported profile container version {found} (expected {expected})")]
    VersionMismatch { expected: u32, found: String },
    #[error("profile is for {found}, expected {expected}")]
    VariantMismatch { expected: Variant, found: Variant },
    #[error("corrupt profile payload: {0}")]
    CorruptPayload(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "cfr")]
    Cfr,
    #[serde(rename = "cfr+")]
    CfrPlus,
    #[serde(rename = "mccfr-ext")]
    MccfrExternal,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Cfr => "cfr",
            Algorithm::CfrPlus => "cfr+",
            Algorithm::MccfrExternal => "mccfr-ext",
        })
    }
}

impl FromStr for Algorithm {
    type Err = CfrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cfr" => Ok(Algorithm::Cfr),
            "cfr+" | "cfrplus" | "cfr-plus" => Ok(Algorithm::CfrPlus),
            "mccfr-ext" | "mccfr" | "external" => Ok(Algorithm::MccfrExternal),
            other => Err(CfrError::InvalidConfig(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Iteration `t` contributes with weight `t`.
    Linear,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub iterations: u64,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub averaging: Averaging,
    /// Hand-strength buckets per street (Monte Carlo CFR on Limit only).
    pub buckets: usize,
    /// Upper bound on stored information sets.
    pub max_infosets: usize,
}

impl SolveConfig {
    /// Defaults: linear averaging for CFR+, uniform otherwise; 8 buckets.
    pub fn new(algorithm: Algorithm, iterations: u64) -> Self {
        Self {
            iterations,
            algorithm,
            seed: 0,
            averaging: match algorithm {
                Algorithm::CfrPlus => Averaging::Linear,
                _ => Averaging::Uniform,
            },
            buckets: 8,
            max_infosets: 20_000_000,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_averaging(mut self, averaging: Averaging) -> Self {
        self.averaging = averaging;
        self
    }

    pub fn with_buckets(mut self, buckets: usize) -> Self {
        self.buckets = buckets;
        self
    }

    pub fn validate(&self) -> Result<(), CfrError> {
        if self.iterations < 1 {
            return Err(CfrError::InvalidConfig("iterations must be at least 1".into()));
        }
        if self.buckets < 1 {
            return Err(CfrError::InvalidConfig("buckets must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn weight(&self, iteration: u64) -> f64 {
        match self.averaging {
            Averaging::Linear => iteration as f64,
            Averaging::Uniform => 1.0,
        }
    }
}

/// Regret and strategy-sum tables for one information set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfosetEntry {
    pub actions: Vec<Action>,
    pub regrets: Vec<f64>,
    pub strategy_sum: Vec<f64>,
}

impl InfosetEntry {
    pub fn new(actions: Vec<Action>) -> Self {
        let n = actions.len();
        Self {
            actions,
            regrets: vec![0.0; n],
            strategy_sum: vec![0.0; n],
        }
    }

    pub fn average_strategy(&self) -> Vec<f64> {
        normalize_or_uniform(&self.strategy_sum)
    }

    pub fn current_strategy(&self) -> Vec<f64> {
        regret_match(&self.regrets).expect("entries are nonempty")
    }
}

/// The solver's output: per-infoset cumulative regrets and strategy sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub variant: Variant,
    pub algorithm: Algorithm,
    pub averaging: Averaging,
    pub iterations: u64,
    pub seed: u64,
    /// Present when keys are over hand-strength buckets (Limit).
    pub abstraction: Option<BucketAbstraction>,
    pub infosets: BTreeMap<String, InfosetEntry>,
}

impl StrategyProfile {
    /// Empty profile: every lookup falls back to uniform.
    pub fn empty(variant: Variant, algorithm: Algorithm) -> Self {
        Self {
            variant,
            algorithm,
            averaging: Averaging::Uniform,
            iterations: 0,
            seed: 0,
            abstraction: None,
            infosets: BTreeMap::new(),
        }
    }

    pub fn entry(&self, key: &str) -> Result<&InfosetEntry, CfrError> {
        self.infosets
            .get(key)
            .ok_or_else(|| CfrError::UnknownInfoset(key.to_string()))
    }

    /// Normalized strategy sum; uniform when nothing has accumulated.
    pub fn average_strategy(&self, key: &str) -> Result<Vec<f64>, CfrError> {
        Ok(self.entry(key)?.average_strategy())
    }

    /// The raw stored regret vector.
    pub fn cumulative_regrets(&self, key: &str) -> Result<Vec<f64>, CfrError> {
        Ok(self.entry(key)?.regrets.clone())
    }

    /// Key under which this profile stores `obs`: the exact infoset key, or
    /// the bucketed key when the profile carries an abstraction.
    pub fn key_for(&self, obs: &Observation) -> String {
        match &self.abstraction {
            Some(abs) => abs.infoset_key(obs),
            None => infoset_key(obs),
        }
    }
}

/// Probabilities proportional to positive regret; uniform when no regret is
/// positive.
pub fn regret_match(regrets: &[f64]) -> Result<Vec<f64>, CfrError> {
    if regrets.is_empty() {
        return Err(CfrError::EmptyVector);
    }
    let positive: f64 = regrets.iter().map(|r| r.max(0.0)).sum();
    if positive > 0.0 {
        Ok(regrets.iter().map(|r| r.max(0.0) / positive).collect())
    } else {
        Ok(vec![1.0 / regrets.len() as f64; regrets.len()])
    }
}

/// CFR+ form: clamps the stored regrets at zero, then matches.
pub fn regret_match_plus(regrets: &mut [f64]) -> Result<Vec<f64>, CfrError> {
    for r in regrets.iter_mut() {
        *r = r.max(0.0);
    }
    regret_match(regrets)
}

pub(crate) fn normalize_or_uniform(v: &[f64]) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter().map(|x| x / total).collect()
    } else {
        vec![1.0 / v.len() as f64; v.len()]
    }
}

/// Solve `variant` with `config`.
pub fn train(variant: Variant, config: &SolveConfig) -> Result<StrategyProfile, CfrError> {
    config.validate()?;
    match config.algorithm {
        Algorithm::Cfr | Algorithm::CfrPlus => {
            let mut trainer = TabularTrainer::new(variant, config.clone())?;
            trainer.run(config.iterations);
            Ok(trainer.profile())
        }
        Algorithm::MccfrExternal => mccfr::train(variant, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regret_matching_cases() {
        assert_eq!(regret_match(&[2.0, -1.0, -1.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(regret_match(&[0.0, 0.0, 0.0]).unwrap(), vec![1.0 / 3.0; 3]);
        assert_eq!(regret_match(&[3.0, 1.0]).unwrap(), vec![0.75, 0.25]);
        assert!(matches!(regret_match(&[]), Err(CfrError::EmptyVector)));
    }

    #[test]
    fn plus_mode_clamps_in_place() {
        let mut r = vec![-2.0, 1.0, 3.0];
        assert_eq!(regret_match_plus(&mut r).unwrap(), vec![0.0, 0.25, 0.75]);
        assert_eq!(r, vec![0.0, 1.0, 3.0]);
    }

    #[test]
    fn config_validation() {
        assert!(SolveConfig::new(Algorithm::Cfr, 0).validate().is_err());
        assert!(SolveConfig::new(Algorithm::Cfr, 1).with_buckets(0).validate().is_err());
        assert_eq!("cfr+".parse::<Algorithm>().unwrap(), Algorithm::CfrPlus);
        assert_eq!(Algorithm::MccfrExternal.to_string(), "mccfr-ext");
    }

    #[test]
    fn untrained_entry_is_uniform() {
        let e = InfosetEntry::new(vec![Action::Fold, Action::Call]);
        assert_eq!(e.average_strategy(), vec![0.5, 0.5]);
    }
}
