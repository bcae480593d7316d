use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gtobench::cards::parse_cards;
use gtobench::cfr::{self, exploitability, load_profile_for, save_profile, Algorithm, Averaging, SolveConfig};
use gtobench::dataset::{append_jsonl, collect_action_dataset, collect_tir_dataset, write_jsonl};
use gtobench::equity::{equity_exact, equity_mc, hand_histogram_with, HoldingRange, DEFAULT_HISTOGRAM_SAMPLES};
use gtobench::game::{Action, Variant};
use gtobench::harness::{default_seeds, run_match, AgentSpec, DEFAULT_SEED_COUNT};
use gtobench::reward::{regret_reward, score_text, RewardWeights};
use gtobench::service::{self, ProfileStore, BIND_ENV, DEFAULT_BIND};
use serde_json::json;

#[derive(Parser)]
#[command(name = "gtobench", version, about = "Poker solving, equities, rewards, solver service and matches")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a variant and write a profile file
    Train(TrainArgs),
    /// Equity and hand histograms for a holding
    Equity(EquityArgs),
    /// Score a tagged trace, or standardize a regret vector
    Reward(RewardArgs),
    /// Run the HTTP solver service
    Serve(ServeArgs),
    /// Paired-seed match between two agents
    Match(MatchArgs),
    /// Generate action-only or tool-augmented records
    Dataset(DatasetArgs),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    variant: Variant,
    #[arg(long, default_value = "cfr+")]
    algo: Algorithm,
    #[arg(long, default_value_t = 10_000)]
    iters: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to linear for cfr+ and uniform otherwise
    #[arg(long)]
    averaging: Option<AveragingArg>,
    /// Buckets per street (Limit)
    #[arg(long, default_value_t = 8)]
    buckets: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AveragingArg {
    Linear,
    Uniform,
}

#[derive(Args)]
struct EquityArgs {
    #[arg(long)]
    variant: Variant,
    /// Private cards, e.g. "SK CT"
    #[arg(long)]
    hole: String,
    #[arg(long, default_value = "")]
    board: String,
    /// Monte Carlo samples (Limit)
    #[arg(long, default_value_t = 200_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON opponent range, `[[["SA","SK"], 1.0], ...]` (Limit)
    #[arg(long)]
    range: Option<PathBuf>,
}

#[derive(Args)]
struct RewardArgs {
    #[arg(long, required_unless_present = "regrets", conflicts_with = "regrets")]
    trace_file: Option<PathBuf>,
    #[arg(long, required_unless_present = "regrets")]
    solver_action: Option<Action>,
    /// Per-call success flags, e.g. "1,0"; default: every call succeeded
    #[arg(long)]
    tool_log: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    alpha_f: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha_t: f64,
    /// Comma-separated regrets to standardize instead of scoring a trace
    #[arg(long, allow_hyphen_values = true)]
    regrets: Option<String>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = BIND_ENV, default_value = DEFAULT_BIND)]
    bind: SocketAddr,
    #[arg(long)]
    profiles_dir: PathBuf,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    variant: Variant,
    #[arg(long)]
    agent_a: AgentSpec,
    #[arg(long)]
    agent_b: AgentSpec,
    /// One seed per line
    #[arg(long, conflicts_with = "num_seeds")]
    seeds_file: Option<PathBuf>,
    #[arg(long)]
    num_seeds: Option<usize>,
    /// Root for derived seeds when --seeds-file is absent
    #[arg(long, default_value_t = 0)]
    seed_root: u64,
    /// Per-decision timeout for external agents
    #[arg(long, default_value_t = 30_000)]
    timeout_ms: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DatasetArgs {
    #[arg(long)]
    variant: Variant,
    #[arg(long)]
    profile: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, conflicts_with = "action_only")]
    tir: bool,
    #[arg(long)]
    action_only: bool,
    /// Append to an existing file of the same kind
    #[arg(long)]
    append: bool,
    #[arg(long)]
    out: PathBuf,
}

fn print_json(v: serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let mut config = SolveConfig::new(a.algo, a.iters).with_seed(a.seed).with_buckets(a.buckets);
    if let Some(avg) = a.averaging {
        config = config.with_averaging(match avg {
            AveragingArg::Linear => Averaging::Linear,
            AveragingArg::Uniform => Averaging::Uniform,
        });
    }
    let start = Instant::now();
    let profile = cfr::train(a.variant, &config)?;
    let elapsed = start.elapsed().as_secs_f64();
    save_profile(&profile, &a.out)?;
    let expl = match a.variant {
        Variant::Limit => None,
        _ => Some(exploitability(&profile)?),
    };
    print_json(json!({
        "variant": a.variant,
        "algorithm": a.algo,
        "iterations": a.iters,
        "infosets": profile.infosets.len(),
        "exploitability": expl,
        "seconds": elapsed,
        "out": a.out,
    }))
}

fn equity(a: EquityArgs) -> Result<()> {
    let hole = parse_cards(&a.hole)?;
    let board = parse_cards(&a.board)?;
    let result = match a.variant {
        Variant::Limit => {
            let range: Option<HoldingRange> = match &a.range {
                Some(p) => Some(serde_json::from_str(&fs::read_to_string(p)?).context("parsing --range")?),
                None => None,
            };
            equity_mc(&hole, &board, range.as_ref(), a.samples, a.seed)?
        }
        v => equity_exact(v, &hole, &board)?,
    };
    let (mine, theirs) = hand_histogram_with(a.variant, &hole, &board, DEFAULT_HISTOGRAM_SAMPLES, a.seed)?;
    print_json(json!({
        "equity": result,
        "my_hand_histogram": mine,
        "opponent_hand_histogram": theirs,
    }))
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| anyhow::anyhow!("bad {what} entry {s:?}")))
        .collect()
}

fn reward(a: RewardArgs) -> Result<()> {
    if let Some(r) = a.regrets {
        let regrets: Vec<f64> = parse_list(&r, "regret")?;
        return print_json(json!(regret_reward(&regrets)?));
    }
    let path = a.trace_file.expect("required by clap");
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let weights = RewardWeights::new(a.alpha_f, a.alpha_t)?;
    let log: Vec<bool> = match a.tool_log {
        Some(s) => parse_list::<u8>(&s, "tool-log")?.into_iter().map(|b| b != 0).collect(),
        None => {
            let calls = gtobench::reward::parse_trace(&text).map(|t| t.tool_calls()).unwrap_or(0);
            vec![true; calls]
        }
    };
    let action = a.solver_action.expect("required by clap");
    print_json(json!(score_text(&text, &log, action, weights)?))
}

fn serve(a: ServeArgs) -> Result<()> {
    let store = ProfileStore::load_dir(&a.profiles_dir)
        .with_context(|| format!("loading profiles from {}", a.profiles_dir.display()))?;
    if store.is_empty() {
        bail!("no *.profile files in {}", a.profiles_dir.display());
    }
    for m in store.metadata() {
        eprintln!("loaded {} profile ({} infosets, {} iterations)", m.variant, m.infosets, m.iterations);
    }
    eprintln!("listening on {}", a.bind);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(service::serve(a.bind, Arc::new(store)))
        .with_context(|| format!("serving on {}", a.bind))
}

fn run_match_cmd(a: MatchArgs) -> Result<()> {
    let seeds = match &a.seeds_file {
        Some(p) => fs::read_to_string(p)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.parse::<u64>().with_context(|| format!("bad seed {l:?}")))
            .collect::<Result<Vec<_>>>()?,
        None => default_seeds(a.num_seeds.unwrap_or(DEFAULT_SEED_COUNT), a.seed_root),
    };
    let timeout = Duration::from_millis(a.timeout_ms);
    let mut agent_a = a.agent_a.clone().with_timeout(timeout).build(a.variant)?;
    let mut agent_b = a.agent_b.clone().with_timeout(timeout).build(a.variant)?;
    let report = run_match(agent_a.as_mut(), agent_b.as_mut(), a.variant, &seeds)?;
    if let Some(out) = &a.out {
        fs::write(out, serde_json::to_string_pretty(&report)?)?;
    }
    print_json(json!({
        "variant": report.variant,
        "agent_a": report.agent_a,
        "agent_b": report.agent_b,
        "games_played": report.games_played,
        "net": report.net,
        "mean_net_a": report.mean_net_a,
        "net_a_se": report.net_a_se,
        "incidents": report.incidents,
    }))
}

fn dataset(a: DatasetArgs) -> Result<()> {
    let profile = load_profile_for(&a.profile, a.variant)?;
    if a.tir {
        let store = ProfileStore::new().with(profile.clone());
        let records = collect_tir_dataset(&profile, &store, a.count, a.seed)?;
        if a.append {
            append_jsonl(&a.out, &records)?;
        } else {
            write_jsonl(&a.out, &records)?;
        }
    } else {
        let records = collect_action_dataset(&profile, a.count, a.seed);
        if a.append {
            append_jsonl(&a.out, &records)?;
        } else {
            write_jsonl(&a.out, &records)?;
        }
    }
    eprintln!("wrote {} {} records to {}", a.count, if a.tir { "tir" } else { "action" }, a.out.display());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Cmd::Train(a) => train(a),
        Cmd::Equity(a) => equity(a),
        Cmd::Reward(a) => reward(a),
        Cmd::Serve(a) => serve(a),
        Cmd::Match(a) => run_match_cmd(a),
        Cmd::Dataset(a) => dataset(a),
    }
}
