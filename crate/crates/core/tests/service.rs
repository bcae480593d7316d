use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use gtobench::cfr::{train, Algorithm, SolveConfig, StrategyProfile};
use gtobench::game::{new_game, Position, Variant};
use gtobench::rng::SplitMix64;
use gtobench::service::{router, solve_query, solve_to_json, ProfileStore, ServiceError, SolverQuery, BODY_LIMIT};
use tower::ServiceExt;

fn store() -> &'static ProfileStore {
    static S: OnceLock<ProfileStore> = OnceLock::new();
    S.get_or_init(|| {
        let kuhn = train(Variant::Kuhn, &SolveConfig::new(Algorithm::CfrPlus, 10_000)).unwrap();
        let leduc = train(Variant::Leduc, &SolveConfig::new(Algorithm::CfrPlus, 10_000)).unwrap();
        ProfileStore::new().with(kuhn).with(leduc)
    })
}

fn query(variant: Variant, hole: &[&str], board: &[&str], pots: (i64, i64), raises: (i64, i64), legal: &[&str], pos: Position) -> SolverQuery {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect();
    SolverQuery {
        variant,
        player_card: s(hole),
        public_card: s(board),
        my_pot: pots.0,
        opponent_pot: pots.1,
        my_raise_num: raises.0,
        opponent_raise_num: raises.1,
        legal_actions: s(legal),
        position: pos,
    }
}

#[test]
fn kuhn_king_calls_a_bet() {
    let q = query(Variant::Kuhn, &["SK"], &[], (1, 2), (0, 1), &["fold", "call"], Position::BB);
    let r = solve_query(&q, store()).unwrap();
    assert_eq!(r.action, "call");
    assert!(r.action_dist["call"] >= 0.99);
    assert_eq!(r.infosets, vec!["K|1|/b".to_string()]);
    assert_eq!(r.my_equity, 1.0);
}

#[test]
fn leduc_bundle_is_complete() {
    let q = query(Variant::Leduc, &["HK"], &["SQ"], (4, 4), (0, 0), &["fold", "check", "raise"], Position::SB);
    let r = solve_query(&q, store()).unwrap();
    assert_eq!(r.action_dist.keys().collect::<Vec<_>>(), vec!["fold", "check", "raise"]);
    assert!((r.action_dist.values().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!((r.my_equity + r.opponent_equity - 1.0).abs() < 1e-9);
    assert_eq!(r.regret_rewards.len(), 3);
    // Round-one "rc" and "crc" both leave 4/4 with no raises yet this round.
    assert_eq!(r.infosets.len(), 2, "{:?}", r.infosets);
    assert_eq!(r.opponent_hand_histogram.get("K"), 0.25);
    let v = serde_json::to_value(&r).unwrap();
    for field in ["action", "action_dist", "my_equity", "opponent_equity", "my_hand_histogram", "opponent_hand_histogram", "regret_rewards", "profile"] {
        assert!(v.get(field).is_some(), "{field}");
    }
}

#[test]
fn invalid_and_unreachable_queries() {
    let dup = query(Variant::Limit, &["SQ", "C7"], &["SQ", "D2", "D3"], (2, 2), (0, 0), &["fold", "check", "raise"], Position::BB);
    assert!(matches!(solve_query(&dup, store()), Err(ServiceError::InvalidQuery(_))));
    let mut other = dup.clone();
    other.public_card = vec!["H9".into(), "D2".into(), "D3".into()];
    assert_eq!(solve_query(&other, store()), Err(ServiceError::NoProfile(Variant::Limit)));

    let bad_pot = query(Variant::Leduc, &["HK"], &[], (3, 2), (0, 0), &["fold", "call", "raise"], Position::SB);
    assert!(matches!(solve_query(&bad_pot, store()), Err(ServiceError::UnknownInfoset(_))));
    let negative = query(Variant::Leduc, &["HK"], &[], (-1, 2), (0, 0), &["fold"], Position::SB);
    assert!(matches!(solve_query(&negative, store()), Err(ServiceError::InvalidQuery(_))));
    let wrong_vocab = query(Variant::Kuhn, &["SK"], &[], (1, 1), (0, 0), &["check", "raise"], Position::SB);
    assert!(matches!(solve_query(&wrong_vocab, store()), Err(ServiceError::InvalidQuery(_))));
    let not_in_deck = query(Variant::Kuhn, &["HK"], &[], (1, 1), (0, 0), &["check", "bet"], Position::SB);
    assert!(matches!(solve_query(&not_in_deck, store()), Err(ServiceError::InvalidQuery(_))));
    let wrong_legal = query(Variant::Leduc, &["HK"], &[], (1, 2), (0, 0), &["fold", "check"], Position::SB);
    assert!(matches!(solve_query(&wrong_legal, store()), Err(ServiceError::UnknownInfoset(_))));
}

fn random_states(variant: Variant, n: usize, seed: u64) -> Vec<(gtobench::game::GameState, usize)> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let mut s = new_game(variant, rng.next_u64());
        while let Some(p) = s.to_act() {
            out.push((s.clone(), p));
            let legal = s.legal_actions().unwrap();
            s = s.apply_action(legal[rng.below(legal.len())]).unwrap();
        }
    }
    out.truncate(n);
    out
}

#[test]
fn responses_agree_with_the_profile() {
    let profile: &StrategyProfile = store().get(Variant::Leduc).unwrap();
    for (state, seat) in random_states(Variant::Leduc, 500, 3) {
        let obs = state.observation(seat);
        let q = SolverQuery::from_observation(&obs);
        let r = solve_query(&q, store()).unwrap();
        let key = profile.key_for(&obs);
        assert!(r.infosets.contains(&key), "{key} not in {:?}", r.infosets);
        if r.infosets.len() == 1 {
            let avg = profile.average_strategy(&key).unwrap();
            let entry = profile.entry(&key).unwrap();
            for (a, p) in entry.actions.iter().zip(avg) {
                assert_eq!(r.action_dist[a.name()], p);
            }
        }
        let best = r.action_dist.values().cloned().fold(f64::MIN, f64::max);
        assert_eq!(r.action_dist[&r.action], best);
        assert_eq!(solve_to_json(&q, store()).unwrap(), solve_to_json(&q, store()).unwrap());
    }
}

#[test]
fn tool_call_round_trip() {
    for (state, seat) in random_states(Variant::Leduc, 100, 8) {
        let q = SolverQuery::from_observation(&state.observation(seat));
        let line = q.to_tool_call();
        assert_eq!(SolverQuery::from_tool_call(&line, Variant::Leduc).unwrap(), q);
    }
    let q = query(Variant::Limit, &["SQ", "C7"], &[], (1, 2), (0, 0), &["fold", "call", "raise"], Position::SB);
    assert_eq!(
        q.to_tool_call(),
        "solver(player_card=['SQ', 'C7'], public_card=[], my_pot=1, opponent_pot=2, my_raise_num=0, opponent_raise_num=0, legal_actions=['fold', 'call', 'raise'], position='SB')"
    );
    assert!(SolverQuery::from_tool_call("solver(my_pot=1)", Variant::Kuhn).is_err());
    assert!(SolverQuery::from_tool_call("calc()", Variant::Kuhn).is_err());
}

async fn send(req: Request<Body>) -> (StatusCode, serde_json::Value, String) {
    let app = router(Arc::new(store().clone()));
    let resp = app.oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let text = String::from_utf8(bytes.to_vec()).unwrap();
    (status, serde_json::from_str(&text).unwrap_or_default(), text)
}

fn post(body: impl Into<Body>) -> Request<Body> {
    Request::post("/solve")
        .header("content-type", "application/json")
        .body(body.into())
        .unwrap()
}

#[tokio::test]
async fn http_contract() {
    let (s, v, _) = send(Request::get("/health").body(Body::empty()).unwrap()).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["profiles"].as_array().unwrap().len(), 2);

    let q = query(Variant::Kuhn, &["SK"], &[], (1, 2), (0, 1), &["fold", "call"], Position::BB);
    let body = serde_json::to_string(&q).unwrap();
    let (s, v, a) = send(post(body.clone())).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["action"], "call");
    let (_, _, b) = send(post(body)).await;
    assert_eq!(a, b);
    assert_eq!(a, solve_to_json(&q, store()).unwrap());

    let (s, v, _) = send(post("{not json")).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["code"], "malformed_body");

    let mut bad = serde_json::to_value(&q).unwrap();
    bad["player_card"] = serde_json::json!(["XX"]);
    let (s, v, _) = send(post(bad.to_string())).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["code"], "invalid_query");

    let limit = query(Variant::Limit, &["SQ", "C7"], &[], (1, 2), (0, 0), &["fold", "call", "raise"], Position::SB);
    let (s, v, _) = send(post(serde_json::to_string(&limit).unwrap())).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "no_profile");

    let (s, v, _) = send(post(vec![b' '; BODY_LIMIT + 1])).await;
    assert_eq!(s, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(v["error"]["code"], "body_too_large");
}

#[tokio::test]
async fn concurrent_requests_agree() {
    let q = query(Variant::Leduc, &["SJ"], &[], (1, 2), (0, 0), &["fold", "call", "raise"], Position::SB);
    let body = serde_json::to_string(&q).unwrap();
    let handles: Vec<_> = (0..8).map(|_| tokio::spawn(send(post(body.clone())))).collect();
    let mut bodies = Vec::new();
    for h in handles {
        let (s, _, text) = h.await.unwrap();
        assert_eq!(s, StatusCode::OK);
        bodies.push(text);
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}
