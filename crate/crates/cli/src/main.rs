//! `warm`: load basket files, rank items and transactions, replay update
//! streams through the online engine, mine weighted rules, and benchmark
//! recompute policies. All outputs are deterministic for a fixed seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use warm_core::eigen::{block_power_top2, EigenError, SolveOptions};
use warm_core::graph::{build_bipartite, build_item_graph};
use warm_core::mining::{generate_rules, mine_frequent};
use warm_core::online::{DeferralDecision, Engine, EngineConfig};
use warm_core::synth::{run_bench, BenchConfig, SynthConfig};
use warm_core::txstore::{load_basket_file, load_update_stream, TransactionStore};

#[derive(Parser)]
#[command(name = "warm", version, about = "Rank transaction data and mine weighted rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank items of a basket file by principal-eigenvector weight
    Rank {
        /// Basket file: one transaction per line, items separated by spaces or commas
        baskets: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Mine weighted frequent itemsets and association rules
    Mine {
        baskets: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Replay an update stream against the online engine
    Stream {
        baskets: PathBuf,
        /// Update file: `A <tid> <item>...`, `D <tid>`, `M <tid> +<item>|-<item>...`
        updates: PathBuf,
        /// Hammer the published snapshot from a second thread while replaying
        #[arg(long)]
        stress: bool,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Generate a synthetic workload and compare recompute policies
    Bench {
        #[arg(long, default_value_t = 100)]
        n_items: usize,
        #[arg(long, default_value_t = 1000)]
        n_tx: usize,
        #[arg(long, default_value_t = 500)]
        n_events: usize,
        #[command(flatten)]
        flags: RunFlags,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Mode {
    /// Transaction-by-item incidence matrix (the default, feeds the miner)
    Bipartite,
    /// Square item co-occurrence matrix
    Itemgraph,
}

/// Every tunable, shared by all subcommands; unset flags fall back to the
/// config file, then to defaults.
#[derive(Args)]
struct RunFlags {
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Staleness threshold for deferring recomputes, in [0, 1)
    #[arg(long)]
    tau: Option<f64>,
    /// Solver convergence tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Hard cap on solver iterations
    #[arg(long)]
    max_iter: Option<usize>,
    /// Minimum weighted support, in (0, 1]
    #[arg(long)]
    minws: Option<f64>,
    /// Minimum weighted confidence, in (0, 1]
    #[arg(long)]
    minconf: Option<f64>,
    /// Drop item pairs co-occurring fewer than this many times (itemgraph mode)
    #[arg(long)]
    min_pair_count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Track the exact perturbation norm instead of the cheap upper bound
    #[arg(long)]
    exact_e: bool,
    /// `key=value` file supplying any of the above; flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct RunConfig {
    mode: Mode,
    tau: f64,
    tol: f64,
    max_iter: Option<usize>,
    minws: f64,
    minconf: f64,
    min_pair_count: usize,
    seed: u64,
    exact_e: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Bipartite,
            tau: 0.01,
            tol: 1e-10,
            max_iter: None,
            minws: 0.1,
            minconf: 0.5,
            min_pair_count: 1,
            seed: 42,
            exact_e: false,
        }
    }
}

impl RunConfig {
    fn resolve(flags: &RunFlags) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &flags.config {
            cfg.apply_file(path)?;
        }
        if let Some(v) = flags.mode {
            cfg.mode = v;
        }
        if let Some(v) = flags.tau {
            cfg.tau = v;
        }
        if let Some(v) = flags.tol {
            cfg.tol = v;
        }
        if let Some(v) = flags.max_iter {
            cfg.max_iter = Some(v);
        }
        if let Some(v) = flags.minws {
            cfg.minws = v;
        }
        if let Some(v) = flags.minconf {
            cfg.minconf = v;
        }
        if let Some(v) = flags.min_pair_count {
            cfg.min_pair_count = v;
        }
        if let Some(v) = flags.seed {
            cfg.seed = v;
        }
        if flags.exact_e {
            cfg.exact_e = true;
        }
        if !(0.0..1.0).contains(&cfg.tau) {
            bail!("tau must be in [0, 1), got {}", cfg.tau);
        }
        if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
            bail!("tol must be a positive number, got {}", cfg.tol);
        }
        Ok(cfg)
    }

    fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let n = idx + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {n}: expected key=value"))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || anyhow!("config line {n}: invalid value {value:?} for {key}");
            match key {
                "mode" => {
                    self.mode = match value {
                        "bipartite" => Mode::Bipartite,
                        "itemgraph" => Mode::Itemgraph,
                        _ => return Err(bad()),
                    }
                }
                "tau" => self.tau = value.parse().map_err(|_| bad())?,
                "tol" => self.tol = value.parse().map_err(|_| bad())?,
                "max_iter" => self.max_iter = Some(value.parse().map_err(|_| bad())?),
                "minws" => self.minws = value.parse().map_err(|_| bad())?,
                "minconf" => self.minconf = value.parse().map_err(|_| bad())?,
                "min_pair_count" => self.min_pair_count = value.parse().map_err(|_| bad())?,
                "seed" => self.seed = value.parse().map_err(|_| bad())?,
                "exact_e" => self.exact_e = value.parse().map_err(|_| bad())?,
                _ => bail!("config line {n}: unknown key {key:?}"),
            }
        }
        Ok(())
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            ..SolveOptions::default()
        }
    }

    fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            tau: self.tau,
            solve: self.solve_options(),
            exact_e: self.exact_e,
        }
    }
}

/// One CSV field holding item tokens joined by `|`. The field is quoted when
/// a token carries a delimiter (`,` or `|`) or a quote, so every output line
/// survives a standard CSV parse.
fn csv_field(tokens: &[String]) -> String {
    let joined = tokens.join("|");
    let needs_quotes = joined.contains(',')
        || joined.contains('"')
        || joined.contains('\n')
        || joined.contains('\r')
        || tokens.iter().any(|t| t.contains('|'));
    if needs_quotes {
        format!("\"{}\"", joined.replace('"', "\"\""))
    } else {
        joined
    }
}

fn one_token(token: &str) -> String {
    csv_field(std::slice::from_ref(&token.to_string()))
}

/// `item,weight` table, heaviest first, ties broken by token. Ordering uses
/// the weight as printed, so rows that render equal always appear in token
/// order instead of leaking sub-display-precision noise.
fn rank_table(pairs: impl IntoIterator<Item = (String, f64)>) -> String {
    let mut rows: Vec<(u64, String)> = pairs
        .into_iter()
        .map(|(token, w)| ((w.max(0.0) * 1e4).round() as u64, token))
        .collect();
    rows.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    let mut out = String::from("item,weight\n");
    for (scaled, token) in rows {
        let _ = writeln!(out, "{},{:.4}", one_token(&token), scaled as f64 / 1e4);
    }
    out
}

fn build_matrix(store: &TransactionStore, cfg: &RunConfig) -> warm_core::graph::SparseMatrix {
    match cfg.mode {
        Mode::Bipartite => build_bipartite(store),
        Mode::Itemgraph => build_item_graph(store, cfg.min_pair_count),
    }
}

fn cmd_rank(baskets: &Path, cfg: &RunConfig) -> Result<()> {
    let store = load_basket_file(baskets)?;
    let matrix = build_matrix(&store, cfg);
    let est = block_power_top2(&matrix, None, &cfg.solve_options())?;
    if !est.converged {
        eprintln!("warning: solver stopped before reaching tolerance");
    }
    let pairs = store
        .item_tokens()
        .iter()
        .enumerate()
        .map(|(i, token)| (token.clone(), est.authority[i]));
    print!("{}", rank_table(pairs));
    Ok(())
}

fn cmd_mine(baskets: &Path, cfg: &RunConfig) -> Result<()> {
    if cfg.mode != Mode::Bipartite {
        bail!("mining requires bipartite mode");
    }
    let store = load_basket_file(baskets)?;
    if build_bipartite(&store).nnz() == 0 {
        return Err(EigenError::EmptyModel.into());
    }
    let mut engine = Engine::new(store, cfg.engine_config());
    engine.refresh()?;
    let snapshot = engine.query()?;
    let frequent = mine_frequent(engine.store(), &snapshot, cfg.minws)?;
    let rules = generate_rules(&frequent, cfg.minconf)?;

    let mut out = String::from("itemset,wsupport\n");
    for set in &frequent {
        let _ = writeln!(out, "{},{:.4}", csv_field(&set.items), set.wsupport);
    }
    out.push('\n');
    out.push_str("antecedent,consequent,wsupport,wconfidence\n");
    for rule in &rules {
        let _ = writeln!(
            out,
            "{},{},{:.4},{:.4}",
            csv_field(&rule.antecedent),
            csv_field(&rule.consequent),
            rule.wsupport,
            rule.wconfidence
        );
    }
    print!("{out}");
    Ok(())
}

fn cmd_stream(baskets: &Path, updates: &Path, stress: bool, cfg: &RunConfig) -> Result<()> {
    if cfg.mode != Mode::Bipartite {
        bail!("streaming requires bipartite mode");
    }
    let store = load_basket_file(baskets)?;
    let events = load_update_stream(updates)?;
    let mut engine = Engine::new(store, cfg.engine_config());
    engine.refresh()?;

    let stop = Arc::new(AtomicBool::new(false));
    let reader_thread = stress.then(|| {
        let reader = engine.reader();
        let stop = Arc::clone(&stop);
        std::thread::spawn(move || {
            // exercises the lock-free snapshot contract while the writer runs:
            // epochs never go backwards and weights stay finite and nonnegative
            let mut last_epoch = 0;
            while !stop.load(Ordering::Relaxed) {
                if let Some(snapshot) = reader.query() {
                    assert!(snapshot.epoch >= last_epoch, "snapshot epoch went backwards");
                    last_epoch = snapshot.epoch;
                    for w in snapshot.authority.values().chain(snapshot.hub.values()) {
                        assert!(w.is_finite() && *w >= 0.0, "published weight out of range");
                    }
                }
                std::thread::yield_now();
            }
        })
    });

    let mut out = String::from("seq,decision,bound\n");
    let mut deferred = 0u64;
    let mut recomputed = 0u64;
    let mut replay_err = None;
    for event in &events {
        let decision = match engine.submit(event) {
            Ok(d) => d,
            Err(e) => {
                replay_err = Some(anyhow!("event {}: {e}", event.seq));
                break;
            }
        };
        let (word, bound) = match decision {
            DeferralDecision::Deferred { bound } => {
                deferred += 1;
                ("deferred", Some(bound))
            }
            DeferralDecision::Recomputed { bound } => {
                recomputed += 1;
                ("recomputed", bound)
            }
        };
        let bound = match bound {
            Some(b) => format!("{b:.6}"),
            None => "inf".to_string(),
        };
        let _ = writeln!(out, "{},{word},{bound}", event.seq);
    }
    stop.store(true, Ordering::Relaxed);
    if let Some(handle) = reader_thread {
        handle
            .join()
            .map_err(|_| anyhow!("snapshot stress reader panicked"))?;
    }
    if let Some(e) = replay_err {
        return Err(e);
    }

    let snapshot = engine.query()?;
    print!("{out}");
    print!(
        "{}",
        rank_table(snapshot.authority.iter().map(|(k, v)| (k.clone(), *v)))
    );
    println!("# deferred={deferred} recomputed={recomputed}");
    Ok(())
}

fn cmd_bench(n_items: usize, n_tx: usize, n_events: usize, cfg: &RunConfig) -> Result<()> {
    if n_items == 0 || n_tx == 0 {
        bail!("n-items and n-tx must be positive");
    }
    let bench = BenchConfig {
        synth: SynthConfig::new(n_items, n_tx, n_events, cfg.seed),
        tau: cfg.tau,
        tol: cfg.tol,
        exact_e: cfg.exact_e,
    };
    let mut out = String::from("step,policy,recomputes_cum,solve_iters_cum,max_rank_error\n");
    for row in run_bench(&bench) {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.3e}",
            row.step, row.policy, row.recomputes_cum, row.solve_iters_cum, row.max_rank_error
        );
    }
    print!("{out}");
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Rank { baskets, flags } => cmd_rank(baskets, &RunConfig::resolve(flags)?),
        Command::Mine { baskets, flags } => cmd_mine(baskets, &RunConfig::resolve(flags)?),
        Command::Stream {
            baskets,
            updates,
            stress,
            flags,
        } => cmd_stream(baskets, updates, *stress, &RunConfig::resolve(flags)?),
        Command::Bench {
            n_items,
            n_tx,
            n_events,
            flags,
        } => cmd_bench(*n_items, *n_tx, *n_events, &RunConfig::resolve(flags)?),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
