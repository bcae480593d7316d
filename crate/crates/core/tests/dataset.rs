use std::sync::OnceLock;

use gtobench::cfr::{train, Algorithm, SolveConfig, StrategyProfile};
use gtobench::dataset::{
    append_jsonl, augment_tir, collect_action_dataset, collect_tir_dataset, reachable_infosets, read_jsonl,
    replay_record, write_jsonl, ActionRecord, DatasetError, TirRecord,
};
use gtobench::game::Variant;
use gtobench::reward::{composite_reward, format_reward, parse_trace, RewardWeights};
use gtobench::service::{solve_query, ProfileStore, SolverQuery};

fn leduc() -> &'static (StrategyProfile, ProfileStore) {
    static P: OnceLock<(StrategyProfile, ProfileStore)> = OnceLock::new();
    P.get_or_init(|| {
        let p = train(Variant::Leduc, &SolveConfig::new(Algorithm::CfrPlus, 10_000)).unwrap();
        let store = ProfileStore::new().with(p.clone());
        (p, store)
    })
}

#[test]
fn action_records_are_legal_normalized_and_replayable() {
    let (p, _) = leduc();
    let recs = collect_action_dataset(p, 1_000, 5);
    assert_eq!(recs.len(), 1_000);
    for r in &recs {
        let legal: Vec<&str> = r.observation.legal_actions.iter().map(|a| a.name()).collect();
        assert!(legal.contains(&r.action.as_str()));
        assert!((r.action_dist.values().sum::<f64>() - 1.0).abs() < 1e-9);
        let best = r.action_dist.values().cloned().fold(f64::MIN, f64::max);
        assert_eq!(r.action_dist[&r.action], best);
        let state = replay_record(r).unwrap();
        assert_eq!(state.observation(r.seat), r.observation);
        assert_eq!(p.key_for(&r.observation), r.infoset_key);
    }
}

#[test]
fn every_reachable_infoset_is_covered() {
    let (p, _) = leduc();
    let recs = collect_action_dataset(p, 10_000, 0);
    let seen: std::collections::BTreeSet<String> = recs.iter().map(|r| r.infoset_key.clone()).collect();
    let reach = reachable_infosets(p);
    let missing: Vec<_> = reach.difference(&seen).collect();
    assert!(missing.is_empty(), "{missing:?}");
    assert!(seen.is_subset(&reach));
}

#[test]
fn tir_records_score_perfectly() {
    let (p, store) = leduc();
    let recs = collect_tir_dataset(p, store, 2_000, 1).unwrap();
    for r in &recs {
        let trace = parse_trace(&r.trace).unwrap();
        assert_eq!(format_reward(&trace), 1);
        let action = r.record.action.parse().unwrap();
        let b = composite_reward(&trace, &[true], action, RewardWeights::default()).unwrap();
        assert_eq!((b.answer, b.format, b.tool), (1, 1, 1.0));
        assert!(r.tool_call.contains(&format!("player_card=['{}']", r.record.observation.private_cards[0])));
        assert_eq!(trace.segments()[1].text, r.tool_call);
        assert_eq!(trace.segments()[2].text, r.tool_output);
    }
}

#[test]
fn mismatched_response_is_rejected() {
    let (p, store) = leduc();
    let recs = collect_action_dataset(p, 50, 2);
    let a = &recs[0];
    let wrong = recs
        .iter()
        .map(|b| solve_query(&SolverQuery::from_observation(&b.observation), store).unwrap())
        .find(|resp| !resp.infosets.contains(&a.infoset_key))
        .expect("some other infoset");
    assert!(matches!(augment_tir(a, &wrong), Err(DatasetError::ResponseMismatch { .. })));
}

#[test]
fn jsonl_round_trip_and_determinism() {
    let (p, store) = leduc();
    let dir = tempfile::tempdir().unwrap();
    let recs = collect_action_dataset(p, 1_000, 3);
    let path = dir.path().join("a.jsonl");
    write_jsonl(&path, &recs).unwrap();
    assert_eq!(read_jsonl::<ActionRecord>(&path).unwrap(), recs);

    let again = dir.path().join("b.jsonl");
    write_jsonl(&again, &collect_action_dataset(p, 1_000, 3)).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());

    let tir = collect_tir_dataset(p, store, 200, 3).unwrap();
    let tpath = dir.path().join("t.jsonl");
    write_jsonl(&tpath, &tir).unwrap();
    assert_eq!(read_jsonl::<TirRecord>(&tpath).unwrap(), tir);
    assert!(matches!(read_jsonl::<ActionRecord>(&tpath), Err(DatasetError::SchemaMismatch(_))));

    let bare = dir.path().join("bare.jsonl");
    let body: String = std::fs::read_to_string(&path).unwrap().lines().skip(1).map(|l| format!("{l}\n")).collect();
    std::fs::write(&bare, body).unwrap();
    assert!(matches!(read_jsonl::<ActionRecord>(&bare), Err(DatasetError::SchemaMismatch(_))));
}

#[test]
fn appends_keep_a_single_header() {
    let (p, _) = leduc();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.jsonl");
    let recs = collect_action_dataset(p, 30, 4);
    append_jsonl(&path, &recs[..10]).unwrap();
    append_jsonl(&path, &recs[10..]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.matches("\"schema\"").count(), 1);
    assert_eq!(read_jsonl::<ActionRecord>(&path).unwrap(), recs);
    let tir_path = dir.path().join("t.jsonl");
    write_jsonl::<TirRecord>(&tir_path, &[]).unwrap();
    assert!(matches!(append_jsonl(&tir_path, &recs), Err(DatasetError::SchemaMismatch(_))));
}

#[test]
fn kuhn_dataset_covers_its_tree() {
    let p = train(Variant::Kuhn, &SolveConfig::new(Algorithm::CfrPlus, 2_000)).unwrap();
    let recs = collect_action_dataset(&p, 2_000, 0);
    let seen: std::collections::BTreeSet<String> = recs.iter().map(|r| r.infoset_key.clone()).collect();
    assert_eq!(seen, reachable_infosets(&p));
}
