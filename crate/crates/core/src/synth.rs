//! Seeded synthetic workloads and the deferral benchmark.
//!
//! Items are drawn from a Zipf-like popularity distribution, which gives the
//! transaction matrix a dominant principal direction and therefore a healthy
//! eigengap; without the skew nearly every update would saturate the
//! rotation bound and the online policy would have nothing to defer.
//!
//! The benchmark replays one event stream through two engines in lockstep: a
//! tau = 0 baseline that recomputes on every event, and the configured
//! online policy. At each step one fresh from-scratch solve serves as the
//! reference for both policies' rank error, so the reported error includes
//! everything: deferral staleness, warm-start drift, and solver tolerance.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::eigen::{block_power_top2, SolveOptions};
use crate::graph::build_bipartite;
use crate::online::{Engine, EngineConfig, RankSnapshot};
use crate::txstore::{parse_baskets, TransactionStore, UpdateEvent};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub n_items: usize,
    pub n_tx: usize,
    pub n_events: usize,
    pub seed: u64,
    /// Zipf exponent of the item popularity skew.
    pub zipf_s: f64,
    pub basket_min: usize,
    pub basket_max: usize,
}

impl SynthConfig {
    pub fn new(n_items: usize, n_tx: usize, n_events: usize, seed: u64) -> Self {
        SynthConfig {
            n_items,
            n_tx,
            n_events,
            seed,
            zipf_s: 1.5,
            basket_min: 2,
            basket_max: 6,
        }
    }
}

fn item_token(idx: usize) -> String {
    format!("i{idx:03}")
}

/// Cumulative popularity table: weight of item k is (k+1)^(-s).
fn zipf_cumulative(n: usize, s: f64) -> Vec<f64> {
    let mut cum = Vec::with_capacity(n);
    let mut total = 0.0;
    for k in 0..n {
        total += ((k + 1) as f64).powf(-s);
        cum.push(total);
    }
    cum
}

fn draw_item(rng: &mut ChaCha8Rng, cum: &[f64]) -> usize {
    let x = rng.gen_range(0.0..*cum.last().expect("nonempty catalog"));
    cum.partition_point(|&c| c <= x).min(cum.len() - 1)
}

/// Distinct items for one basket, popularity-weighted.
fn draw_basket(rng: &mut ChaCha8Rng, cum: &[f64], min: usize, max: usize) -> Vec<String> {
    let size = rng.gen_range(min..=max).min(cum.len());
    let mut picked: Vec<usize> = Vec::with_capacity(size);
    let mut attempts = 0;
    while picked.len() < size && attempts < 30 * size {
        attempts += 1;
        let item = draw_item(rng, cum);
        if !picked.contains(&item) {
            picked.push(item);
        }
    }
    if picked.is_empty() {
        picked.push(draw_item(rng, cum));
    }
    picked.into_iter().map(item_token).collect()
}

/// Deterministic synthetic store: `n_tx` baskets over `n_items` items.
pub fn generate_store(cfg: &SynthConfig) -> TransactionStore {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cum = zipf_cumulative(cfg.n_items, cfg.zipf_s);
    let mut text = String::new();
    for _ in 0..cfg.n_tx {
        let basket = draw_basket(&mut rng, &cum, cfg.basket_min, cfg.basket_max);
        text.push_str(&basket.join(" "));
        text.push('\n');
    }
    parse_baskets(&text).expect("generated baskets are well formed")
}

/// Deterministic event stream valid against `base`: mostly single-item
/// swaps, with some transaction adds and removes. Every event is applied to
/// a shadow copy while generating, so preconditions hold when replayed.
pub fn generate_events(cfg: &SynthConfig, base: &TransactionStore) -> Vec<UpdateEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5eed));
    let cum = zipf_cumulative(cfg.n_items, cfg.zipf_s);
    let mut sim = base.clone();
    let mut events = Vec::with_capacity(cfg.n_events);
    for k in 0..cfg.n_events {
        let seq = (k + 1) as u64;
        let live: Vec<String> = sim
            .transactions()
            .map(|(_, tid, _)| tid.to_string())
            .collect();
        let roll: f64 = rng.gen();
        let event = if roll < 0.6 && !live.is_empty() {
            // swap one item inside an existing basket
            let tid = &live[rng.gen_range(0..live.len())];
            let row = sim.row_of(tid).expect("tid is live");
            let items: Vec<String> = sim
                .row_items(row)
                .expect("live row")
                .iter()
                .map(|&i| sim.item_token(i).to_string())
                .collect();
            let removed = items[rng.gen_range(0..items.len())].clone();
            let mut added = None;
            for _ in 0..20 {
                let candidate = item_token(draw_item(&mut rng, &cum));
                if !items.contains(&candidate) {
                    added = Some(candidate);
                    break;
                }
            }
            match added {
                Some(add) => UpdateEvent::modify(seq, tid.clone(), &[add.as_str()], &[removed.as_str()]),
                // basket already spans the catalog: grow the store instead
                None => UpdateEvent {
                    seq,
                    kind: crate::txstore::EventKind::Add {
                        tid: format!("e{k}"),
                        items: draw_basket(&mut rng, &cum, cfg.basket_min, cfg.basket_max),
                    },
                },
            }
        } else if roll < 0.8 || live.len() <= 3 {
            UpdateEvent {
                seq,
                kind: crate::txstore::EventKind::Add {
                    tid: format!("e{k}"),
                    items: draw_basket(&mut rng, &cum, cfg.basket_min, cfg.basket_max),
                },
            }
        } else {
            let tid = live[rng.gen_range(0..live.len())].clone();
            UpdateEvent::remove(seq, tid)
        };
        sim.apply_event(&event)
            .expect("generated event satisfies preconditions");
        events.push(event);
    }
    events
}

/// One line of the benchmark CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    /// 0 is the cold start; events are 1-based.
    pub step: usize,
    /// "cold", "baseline" (tau = 0), or "online".
    pub policy: &'static str,
    pub recomputes_cum: u64,
    pub solve_iters_cum: u64,
    /// L∞ distance between the policy's published authority map and a fresh
    /// full solve on the current store.
    pub max_rank_error: f64,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub synth: SynthConfig,
    pub tau: f64,
    pub tol: f64,
    pub exact_e: bool,
}

fn fresh_authority(store: &TransactionStore, opts: &SolveOptions) -> Vec<(String, f64)> {
    let a = build_bipartite(store);
    if a.nnz() == 0 {
        return Vec::new();
    }
    let est = block_power_top2(&a, None, opts).expect("nonzero matrix");
    store
        .item_tokens()
        .iter()
        .enumerate()
        .map(|(i, token)| (token.clone(), est.authority[i].max(0.0)))
        .collect()
}

fn rank_error(fresh: &[(String, f64)], snap: &RankSnapshot) -> f64 {
    let mut err = 0.0f64;
    for (token, weight) in fresh {
        let published = snap.authority.get(token).copied().unwrap_or(0.0);
        err = err.max((published - weight).abs());
    }
    for (token, &published) in &snap.authority {
        if !fresh.iter().any(|(t, _)| t == token) {
            err = err.max(published.abs());
        }
    }
    err
}

/// Replay the generated stream under the baseline and online policies,
/// reporting cumulative solve work and the true rank error per step.
pub fn run_bench(cfg: &BenchConfig) -> Vec<BenchRow> {
    let solve = SolveOptions {
        tol: cfg.tol,
        seed: cfg.synth.seed,
        ..SolveOptions::default()
    };
    let store = generate_store(&cfg.synth);
    let events = generate_events(&cfg.synth, &store);

    let mut baseline = Engine::new(
        store.clone(),
        EngineConfig {
            tau: 0.0,
            solve: solve.clone(),
            exact_e: false,
        },
    );
    let mut online = Engine::new(
        store,
        EngineConfig {
            tau: cfg.tau,
            solve: solve.clone(),
            exact_e: cfg.exact_e,
        },
    );
    baseline.refresh().expect("cold baseline solve");
    online.refresh().expect("cold online solve");

    let mut rows = Vec::with_capacity(1 + 2 * events.len());
    let fresh = fresh_authority(baseline.store(), &solve);
    rows.push(BenchRow {
        step: 0,
        policy: "cold",
        recomputes_cum: baseline.stats().recomputes,
        solve_iters_cum: baseline.stats().solver_iterations,
        max_rank_error: rank_error(&fresh, &baseline.query().expect("published")),
    });

    for (k, event) in events.iter().enumerate() {
        baseline.submit(event).expect("event precondition");
        online.submit(event).expect("event precondition");
        // one reference solve serves both policies; it is reporting-only and
        // not charged to either engine
        let fresh = fresh_authority(baseline.store(), &solve);
        for (policy, engine) in [("baseline", &baseline), ("online", &online)] {
            rows.push(BenchRow {
                step: k + 1,
                policy,
                recomputes_cum: engine.stats().recomputes,
                solve_iters_cum: engine.stats().solver_iterations,
                max_rank_error: rank_error(&fresh, &engine.query().expect("published")),
            });
        }
    }
    rows
}
