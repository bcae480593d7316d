//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p gtobench --test acceptance`.

use std::time::{Duration, Instant};

use gtobench::cards::parse_cards;
use gtobench::cfr::{exploitability, expected_value, train, Algorithm, SolveConfig, StrategyProfile};
use gtobench::dataset::{collect_tir_dataset, read_jsonl, replay_record, write_jsonl, TirRecord};
use gtobench::equity::{equity_exact, equity_mc};
use gtobench::game::{new_game, Action, Variant};
use gtobench::harness::{default_seeds, run_match, AlwaysCall, CfrAgent, RandomAgent};
use gtobench::reward::{composite_reward, format_reward, parse_trace, regret_reward, render_trace, score_text};
use gtobench::reward::{RewardWeights, Segment, Tag};
use gtobench::rng::SplitMix64;
use gtobench::service::{solve_query, solve_to_json, ProfileStore, SolverQuery};

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn kuhn() -> Outcome {
    let ((profile, expl, value), took) = timed(|| {
        let p = train(Variant::Kuhn, &SolveConfig::new(Algorithm::CfrPlus, 10_000)).unwrap();
        let e = exploitability(&p).unwrap();
        let v = expected_value(&p).unwrap();
        (p, e, v)
    });
    let gap = (value + 1.0 / 18.0).abs();
    outcome(
        expl < 1e-3 && gap <= 1e-3 && took < Duration::from_secs(10),
        format!(
            "{} iters, exploitability {expl:.2e} (< 1e-3), P0 value {value:.6} (|+1/18| = {gap:.1e} <= 1e-3), {:.2}s (< 10s)",
            profile.iterations,
            took.as_secs_f64()
        ),
    )
}

fn leduc(profile: &StrategyProfile, took: Duration) -> Outcome {
    let expl = exploitability(profile).unwrap();
    outcome(
        expl < 5e-3 && profile.iterations <= 100_000 && took < Duration::from_secs(600),
        format!(
            "{} iters, exploitability {expl:.2e} (< 5e-3), {:.2}s (< 600s)",
            profile.iterations,
            took.as_secs_f64()
        ),
    )
}

fn kt_equity() -> Outcome {
    let hole = parse_cards("SK CT").unwrap();
    let r = equity_mc(&hole, &[], None, 200_000, 0).unwrap();
    outcome(
        (0.57..=0.63).contains(&r.equity),
        format!("KsTc vs random: {:.4} ± {:.4} over {} samples, want [0.57, 0.63]", r.equity, r.half_width, r.samples),
    )
}

/// Independent count over the rank multiset {J,J,Q,Q,K,K}: returns
/// (2*wins + ties, 2*deals).
fn leduc_oracle(mine: u8) -> (u64, u64) {
    let mut deck = vec![0u8, 0, 1, 1, 2, 2];
    let i = deck.iter().position(|&r| r == mine).unwrap();
    deck.remove(i);
    let (mut score, mut total) = (0, 0);
    for (o, &opp) in deck.iter().enumerate() {
        for (b, &board) in deck.iter().enumerate() {
            if b == o {
                continue;
            }
            let key = |r: u8| if r == board { 10 + r } else { r };
            score += match key(mine).cmp(&key(opp)) {
                std::cmp::Ordering::Greater => 2,
                std::cmp::Ordering::Equal => 1,
                std::cmp::Ordering::Less => 0,
            };
            total += 2;
        }
    }
    (score, total)
}

fn leduc_equities() -> Outcome {
    let want = [("J", 0u8, 3u64), ("Q", 1, 5), ("K", 2, 7)];
    let mut ok = true;
    let mut parts = Vec::new();
    let mut sum = 0.0;
    for (label, rank, tenths) in want {
        let r = equity_exact(Variant::Leduc, &parse_cards(&format!("S{label}")).unwrap(), &[]).unwrap();
        let c = r.counts;
        let lib = (2 * c.win + c.tie, 2 * c.total());
        let oracle = leduc_oracle(rank);
        ok &= lib.0 * oracle.1 == oracle.0 * lib.1 && lib.0 * 10 == tenths * lib.1;
        sum += r.equity;
        parts.push(format!("{label}={}/{} ({:.3})", lib.0, lib.1, r.equity));
    }
    ok &= (sum / 3.0 - 0.5).abs() < 1e-15;
    outcome(ok, format!("{}; mean over ranks {:.3} (complementarity 0.5)", parts.join(", "), sum / 3.0))
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn regret_properties() -> Outcome {
    let mut rng = SplitMix64::new(0xE0);
    let (mut worst_mean, mut worst_std, mut worst_affine) = (0f64, 0f64, 0f64);
    let (mut argmax_breaks, mut pow2_breaks, mut degenerate) = (0, 0, 0);
    for _ in 0..1_000 {
        let n = 2 + rng.below(6);
        let r: Vec<f64> = (0..n).map(|_| rng.next_f64() * 200.0 - 100.0).collect();
        let z = regret_reward(&r).unwrap();
        let mean = z.iter().sum::<f64>() / n as f64;
        let std = (z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        if z.iter().all(|&x| x == 0.0) {
            degenerate += 1;
            continue;
        }
        worst_mean = worst_mean.max(mean.abs());
        worst_std = worst_std.max((std - 1.0).abs());

        let a = 0.01 + rng.next_f64() * 100.0;
        let b = rng.next_f64() * 200.0 - 100.0;
        let moved: Vec<f64> = r.iter().map(|x| a * x + b).collect();
        let zm = regret_reward(&moved).unwrap();
        worst_affine = zm.iter().zip(&z).map(|(p, q)| (p - q).abs()).fold(worst_affine, f64::max);
        argmax_breaks += usize::from(argmax(&zm) != argmax(&r) || argmax(&z) != argmax(&r));

        let k = 2f64.powi(rng.below(20) as i32 - 10);
        let scaled: Vec<f64> = r.iter().map(|x| x * k).collect();
        pow2_breaks += usize::from(regret_reward(&scaled).unwrap() != z);
    }
    outcome(
        worst_mean <= 1e-12 && worst_std <= 1e-9 && worst_affine <= 1e-9 && argmax_breaks == 0 && pow2_breaks == 0,
        format!(
            "1000 vectors ({degenerate} degenerate): max |mean| {worst_mean:.1e} (<= 1e-12), max |std-1| {worst_std:.1e} (<= 1e-9), \
             affine max |dz| {worst_affine:.1e} (<= 1e-9, bit-exact under power-of-two scaling: {} breaks), argmax breaks {argmax_breaks}",
            pow2_breaks
        ),
    )
}

fn seg(tag: Tag, text: &str) -> Segment {
    Segment::new(tag, text)
}

fn composite_suite() -> Outcome {
    use Tag::*;
    // Dyadic weights keep the hand-computed totals exact in binary.
    let w = RewardWeights::new(0.25, 0.5).unwrap();
    let solver = Action::Call;
    let mut failures = Vec::new();
    let mut cases = 0;
    for answer in ["call", "fold"] {
        for well_formed in [true, false] {
            for log in [vec![true, true], vec![true, false], vec![false, false]] {
                let mut segs = vec![
                    seg(Think, "price is good"),
                    seg(Tool, "solver(...)"),
                    seg(Output, "{}"),
                    seg(Think, "again"),
                    seg(Tool, "solver(...)"),
                    seg(Output, "{}"),
                    seg(Think, "done"),
                    seg(Answer, answer),
                ];
                if !well_formed {
                    segs.swap(0, 1);
                }
                let trace = parse_trace(&render_trace(&segs)).unwrap();
                let b = composite_reward(&trace, &log, solver, w).unwrap();
                let a = if answer == "call" { 1.0 } else { -1.0 };
                let f = if well_formed { 0.25 } else { 0.0 };
                let t = match log.iter().filter(|&&x| x).count() {
                    2 => 0.5,
                    1 => 0.25,
                    _ => 0.0,
                };
                let want = a + f + t;
                cases += 1;
                if b.total != want {
                    failures.push(format!("{answer}/{well_formed}/{log:?}: {} != {want}", b.total));
                }
            }
        }
    }

    let mut rng = SplitMix64::new(0xC0);
    let tags = [Tag::Think, Tag::Tool, Tag::Output, Tag::Answer];
    let answers = ["call", "fold", "raise", "check", "bet", " CALL ", "maybe"];
    let (mut lo, mut hi, mut out_of_bounds) = (f64::MAX, f64::MIN, 0);
    let d = RewardWeights::default();
    for i in 0..1_000 {
        let segs: Vec<Segment> = (0..rng.below(9))
            .map(|_| {
                let tag = tags[rng.below(4)];
                seg(tag, if tag == Tag::Answer { answers[rng.below(answers.len())] } else { "x" })
            })
            .collect();
        let mut text = render_trace(&segs);
        if i % 10 == 0 && !text.is_empty() {
            text.truncate(rng.below(text.len()));
        }
        let calls = parse_trace(&text).map(|t| t.tool_calls()).unwrap_or(0);
        let log: Vec<bool> = (0..calls).map(|_| rng.below(2) == 1).collect();
        let b = score_text(&text, &log, Action::Call, d).unwrap();
        lo = lo.min(b.total);
        hi = hi.max(b.total);
        out_of_bounds += usize::from(b.total < -1.0 || b.total > 1.0 + d.alpha_f + d.alpha_t);
    }
    outcome(
        failures.is_empty() && cases == 12 && out_of_bounds == 0,
        format!(
            "{cases} crafted cases, {} mismatches{}; 1000 random traces in [{lo:.3}, {hi:.3}] (bounds [-1, 1.2]), {out_of_bounds} violations",
            failures.len(),
            if failures.is_empty() { String::new() } else { format!(" {failures:?}") }
        ),
    )
}

fn protocol(profile: &StrategyProfile) -> Outcome {
    let seeds = default_seeds(50, 1);
    let mut notes = Vec::new();
    let mut ok = true;
    for variant in Variant::ALL {
        let r = run_match(&mut RandomAgent::new(1), &mut RandomAgent::new(2), variant, &seeds).unwrap();
        let per_game = r.games.iter().all(|g| g.net[0] + g.net[1] == 0);
        ok &= r.games_played == 100 && r.games.len() == 100 && r.net[0] + r.net[1] == 0 && per_game;
        let selfs = [
            run_match(&mut AlwaysCall, &mut AlwaysCall, variant, &seeds).unwrap().net,
            run_match(&mut RandomAgent::new(7), &mut RandomAgent::new(7), variant, &seeds).unwrap().net,
        ];
        ok &= selfs.iter().all(|n| *n == [0, 0]);
        notes.push(format!("{variant}: {} games, net {:?}", r.games_played, r.net));
    }
    let p = std::sync::Arc::new(profile.clone());
    let cfr_self = run_match(&mut CfrAgent::new(p.clone(), 3), &mut CfrAgent::new(p, 3), Variant::Leduc, &seeds).unwrap();
    ok &= cfr_self.net == [0, 0];
    outcome(ok, format!("{}; self-matches net [0, 0]", notes.join("; ")))
}

fn beats_baselines(profile: &StrategyProfile) -> Outcome {
    let p = std::sync::Arc::new(profile.clone());
    let seeds = default_seeds(500, 4);
    let vs_random = run_match(&mut CfrAgent::new(p.clone(), 1), &mut RandomAgent::new(2), Variant::Leduc, &seeds).unwrap();
    let vs_call = run_match(&mut CfrAgent::new(p, 1), &mut AlwaysCall, Variant::Leduc, &seeds).unwrap();
    let margin = |r: &gtobench::harness::MatchReport| r.net[0] as f64 / r.net_a_se;
    outcome(
        margin(&vs_random) > 3.0 && margin(&vs_call) > 3.0,
        format!(
            "500 paired seeds: vs random {:+} chips (SE {:.1}, {:.1} SE), vs always_call {:+} chips (SE {:.1}, {:.1} SE), want > 3 SE",
            vs_random.net[0],
            vs_random.net_a_se,
            margin(&vs_random),
            vs_call.net[0],
            vs_call.net_a_se,
            margin(&vs_call)
        ),
    )
}

fn tool_bundle(store: &ProfileStore) -> Outcome {
    let mut rng = SplitMix64::new(0x70);
    let mut fails = [0usize; 5];
    let mut n = 0;
    while n < 1_000 {
        let mut state = new_game(Variant::Leduc, rng.next_u64());
        let stop = rng.below(6);
        for _ in 0..stop {
            if state.to_act().is_none() {
                break;
            }
            let legal = state.legal_actions().unwrap();
            state = state.apply_action(legal[rng.below(legal.len())]).unwrap();
        }
        let Some(seat) = state.to_act() else { continue };
        n += 1;
        let obs = state.observation(seat);
        let q = SolverQuery::from_observation(&obs);
        let r = solve_query(&q, store).unwrap();

        let keys: Vec<&str> = r.action_dist.keys().map(String::as_str).collect();
        let legal: Vec<&str> = q.legal_actions.iter().map(String::as_str).collect();
        let total: f64 = r.action_dist.values().sum();
        fails[0] += usize::from(keys != legal || (total - 1.0).abs() > 1e-9 || r.action_dist.values().any(|&p| p < 0.0));

        fails[1] += usize::from((r.my_equity + r.opponent_equity - 1.0).abs() > 1e-9);

        let visible: Vec<char> = obs.private_cards.iter().chain(&obs.community).map(|c| c.rank.to_char()).collect();
        let unseen = 6 - visible.len();
        let excluded = ["J", "Q", "K"].iter().all(|label| {
            let shown = visible.iter().filter(|c| c.to_string() == *label).count();
            let mine = obs.private_cards[0].rank.to_char().to_string() == *label;
            r.opponent_hand_histogram.get(label) == (2 - shown) as f64 / unseen as f64
                && r.my_hand_histogram.get(label) == if mine { 1.0 } else { 0.0 }
        });
        fails[2] += usize::from(!excluded);

        let probs: Vec<f64> = r.action_dist.values().copied().collect();
        fails[3] += usize::from(r.action != keys[argmax(&probs)]);

        fails[4] += usize::from(solve_to_json(&q, store).unwrap() != solve_to_json(&q, store).unwrap());
    }
    outcome(
        fails.iter().all(|&f| f == 0),
        format!(
            "{n} reachable Leduc queries: support/normalization {} failures, equity complement {}, histogram exclusion {}, argmax {}, non-identical bodies {}",
            fails[0], fails[1], fails[2], fails[3], fails[4]
        ),
    )
}

fn dataset(profile: &StrategyProfile, store: &ProfileStore) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.jsonl");
    let second = dir.path().join("b.jsonl");
    write_jsonl(&first, &collect_tir_dataset(profile, store, 10_000, 11).unwrap()).unwrap();
    write_jsonl(&second, &collect_tir_dataset(profile, store, 10_000, 11).unwrap()).unwrap();
    let recs: Vec<TirRecord> = read_jsonl(&first).unwrap();
    let (mut unparsed, mut unscored, mut unreplayed) = (0, 0, 0);
    for r in &recs {
        let Ok(trace) = parse_trace(&r.trace) else {
            unparsed += 1;
            continue;
        };
        let action: Action = r.record.action.parse().unwrap();
        let log = vec![true; trace.tool_calls()];
        let b = composite_reward(&trace, &log, action, RewardWeights::default()).unwrap();
        unscored += usize::from(format_reward(&trace) != 1 || b.answer != 1);
        unreplayed += usize::from(replay_record(&r.record).map(|s| s.observation(r.record.seat)).ok().as_ref() != Some(&r.record.observation));
    }
    let identical = std::fs::read(&first).unwrap() == std::fs::read(&second).unwrap();
    outcome(
        recs.len() == 10_000 && unparsed + unscored + unreplayed == 0 && identical,
        format!(
            "{} records: {unparsed} unparsed, {unscored} not (format 1, answer +1), {unreplayed} replay mismatches, regeneration byte-identical: {identical}",
            recs.len()
        ),
    )
}

fn main() {
    let (leduc_profile, leduc_took) =
        timed(|| train(Variant::Leduc, &SolveConfig::new(Algorithm::CfrPlus, 10_000)).unwrap());
    let store = ProfileStore::new().with(leduc_profile.clone());

    let criteria: Vec<Criterion> = vec![
        ("kuhn cfr+ convergence", Box::new(kuhn)),
        ("leduc cfr+ convergence", Box::new(|| leduc(&leduc_profile, leduc_took))),
        ("hold'em equity KsTc", Box::new(kt_equity)),
        ("leduc exact equities", Box::new(leduc_equities)),
        ("regret reward properties", Box::new(regret_properties)),
        ("composite reward", Box::new(composite_suite)),
        ("match protocol", Box::new(|| protocol(&leduc_profile))),
        ("leduc cfr+ beats baselines", Box::new(|| beats_baselines(&leduc_profile))),
        ("tool bundle integrity", Box::new(|| tool_bundle(&store))),
        ("dataset self-consistency", Box::new(|| dataset(&leduc_profile, &store))),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        failed += usize::from(!o.pass);
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
