use std::sync::OnceLock;
use std::time::Instant;

use gtobench::cfr::{
    best_response_value, decode_profile, encode_profile, expected_value, exploitability, load_profile,
    load_profile_for, regret_match, save_profile, train, Algorithm, Averaging, CfrError, SolveConfig,
    StrategyProfile, TabularTrainer,
};
use gtobench::game::Variant;

fn kuhn_plus() -> &'static StrategyProfile {
    static P: OnceLock<StrategyProfile> = OnceLock::new();
    P.get_or_init(|| train(Variant::Kuhn, &SolveConfig::new(Algorithm::CfrPlus, 10_000)).unwrap())
}

#[test]
fn kuhn_cfr_plus_converges_to_known_value() {
    let start = Instant::now();
    let p = kuhn_plus();
    assert!(start.elapsed().as_secs_f64() < 10.0);
    assert!(exploitability(p).unwrap() < 1e-3);
    assert!((expected_value(p).unwrap() + 1.0 / 18.0).abs() < 1e-3);
}

#[test]
fn kuhn_equilibrium_structure() {
    let p = kuhn_plus();
    // Player 2 always calls with the king and never with the jack, and
    // bets the king after a check.
    let call_k = p.average_strategy("K|1|/b").unwrap();
    assert!(call_k[1] > 0.99);
    let call_j = p.average_strategy("J|1|/b").unwrap();
    assert!(call_j[0] > 0.99);
    let bet_k = p.average_strategy("K|1|/x").unwrap();
    assert!(bet_k[1] > 0.99);
    // Player 1 bets the king three times as often as the jack.
    let alpha = p.average_strategy("J|0|").unwrap()[1];
    let king = p.average_strategy("K|0|").unwrap()[1];
    assert!((king - 3.0 * alpha).abs() < 0.05, "alpha {alpha} king {king}");
}

#[test]
fn uniform_profile_best_responses() {
    // Oracle: against a uniformly random opponent, hand-computed expectimax.
    let p = StrategyProfile::empty(Variant::Kuhn, Algorithm::Cfr);
    let filled = {
        let mut t = TabularTrainer::new(Variant::Kuhn, SolveConfig::new(Algorithm::Cfr, 0)).unwrap();
        t.run(0);
        t.profile()
    };
    assert!(p.infosets.is_empty());
    let br0 = best_response_value(&filled, 0).unwrap();
    let br1 = best_response_value(&filled, 1).unwrap();
    assert!((br0 - 0.5).abs() < 1e-12, "{br0}");
    assert!((br1 - 5.0 / 12.0).abs() < 1e-12, "{br1}");
    assert!((exploitability(&filled).unwrap() - 11.0 / 24.0).abs() < 1e-12);
    assert!(matches!(
        best_response_value(&p, 0),
        Err(CfrError::IncompleteProfile(_))
    ));
}

#[test]
fn first_iteration_regrets_follow_the_recurrence() {
    // One vanilla iteration from uniform play. Player 1 holding the king at
    // the root: check is worth (1/2)(1+... ) computed by hand below.
    let mut t = TabularTrainer::new(Variant::Kuhn, SolveConfig::new(Algorithm::Cfr, 1)).unwrap();
    t.run(1);
    let p = t.profile();
    // With K and uniform opponents, at root: check leads to P2 {check: +1,
    // bet: then P1 {fold: -1, call: +2}} so check = 1/2*1 + 1/2*(1/2*-1 + 1/2*2) = 0.75;
    // bet leads to P2 {fold: +1, call: +2} = 1.5. Value 1.125.
    // Reach of the other player (chance included) is 1/6 * 2 = 1/3 of the K deals.
    let r = p.cumulative_regrets("K|0|").unwrap();
    let third = 1.0 / 3.0;
    assert!((r[0] - third * (0.75 - 1.125)).abs() < 1e-12, "{r:?}");
    assert!((r[1] - third * (1.5 - 1.125)).abs() < 1e-12, "{r:?}");
}

#[test]
fn mccfr_exploitability_trends_down() {
    let mut med = Vec::new();
    for iters in [1_000u64, 10_000, 100_000] {
        let mut xs: Vec<f64> = (0..5)
            .map(|s| {
                let c = SolveConfig::new(Algorithm::MccfrExternal, iters).with_seed(s);
                exploitability(&train(Variant::Kuhn, &c).unwrap()).unwrap()
            })
            .collect();
        xs.sort_by(f64::total_cmp);
        med.push(xs[2]);
    }
    assert!(med[0] > med[1] && med[1] > med[2], "{med:?}");
    assert!(med[2] < 0.02, "{med:?}");
}

#[test]
fn training_is_deterministic() {
    for alg in [Algorithm::Cfr, Algorithm::CfrPlus, Algorithm::MccfrExternal] {
        let c = SolveConfig::new(alg, 500).with_seed(9);
        let a = encode_profile(&train(Variant::Kuhn, &c).unwrap());
        let b = encode_profile(&train(Variant::Kuhn, &c).unwrap());
        assert_eq!(a, b);
    }
}

#[test]
fn averaging_choice_changes_result_but_both_converge() {
    let lin = train(Variant::Kuhn, &SolveConfig::new(Algorithm::CfrPlus, 3000).with_averaging(Averaging::Linear)).unwrap();
    let uni = train(Variant::Kuhn, &SolveConfig::new(Algorithm::CfrPlus, 3000).with_averaging(Averaging::Uniform)).unwrap();
    assert!(exploitability(&lin).unwrap() < 5e-3);
    assert!(exploitability(&uni).unwrap() < 2e-2);
}

#[test]
fn vanilla_cfr_converges_on_kuhn() {
    let p = train(Variant::Kuhn, &SolveConfig::new(Algorithm::Cfr, 10_000)).unwrap();
    assert!(exploitability(&p).unwrap() < 1e-2);
}

#[test]
fn unsupported_combinations_are_rejected() {
    assert!(matches!(
        TabularTrainer::new(Variant::Limit, SolveConfig::new(Algorithm::CfrPlus, 1)),
        Err(CfrError::UnsupportedCombination { .. })
    ));
    assert!(matches!(
        train(Variant::Limit, &SolveConfig::new(Algorithm::Cfr, 1)),
        Err(CfrError::UnsupportedCombination { .. })
    ));
    let mut tiny = SolveConfig::new(Algorithm::MccfrExternal, 100);
    tiny.max_infosets = 3;
    assert!(matches!(
        train(Variant::Leduc, &tiny),
        Err(CfrError::CapacityExceeded { limit: 3 })
    ));
}

#[test]
fn profile_container_round_trip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kuhn.profile");
    let p = kuhn_plus();
    save_profile(p, &path).unwrap();
    let q = load_profile(&path).unwrap();
    assert_eq!(&q, p);
    assert!(matches!(
        load_profile_for(&path, Variant::Leduc),
        Err(CfrError::VariantMismatch { .. })
    ));

    let text = encode_profile(p);
    let bumped = text.replacen("gtobench-profile 1", "gtobench-profile 2", 1);
    assert!(matches!(decode_profile(&bumped), Err(CfrError::VersionMismatch { .. })));
    let truncated = &text[..text.len() - 10];
    assert!(matches!(decode_profile(truncated), Err(CfrError::CorruptPayload(_))));
    let flipped = text.replacen("\"K|0|\"", "\"Q|0|\"", 1);
    assert!(matches!(decode_profile(&flipped), Err(CfrError::CorruptPayload(_))));
    assert!(matches!(decode_profile("hello"), Err(CfrError::CorruptPayload(_))));
}

#[test]
fn regret_match_rejects_empty() {
    assert!(matches!(regret_match(&[]), Err(CfrError::EmptyVector)));
}
