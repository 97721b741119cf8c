//! Deferred recomputation of the rankings under a stream of updates.
//!
//! Each applied event adds its cells to a pending delta. The engine bounds
//! how far the published principal eigenvector can have rotated using the
//! eigengap of the last solve: with S = AᵀA perturbed to S + E,
//! sin θ ≤ ‖E‖_F / (δ − ‖E‖_F) whenever ‖E‖_F < δ/2. While that bound stays
//! within the tolerance τ, queries keep being served from the stale snapshot;
//! once it saturates or exceeds τ, all pending deltas are applied at once and
//! one warm-started solve refreshes the snapshot.
//!
//! Queries are lock-free: snapshots are published atomically through an
//! [`arc_swap`] cell, so readers see the old or the new ranking, never a mix.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use arc_swap::ArcSwapOption;
use thiserror::Error;

use crate::eigen::{block_power_top2, suggested_max_iter, EigenEstimate, SolveOptions};
use crate::graph::{build_bipartite, delta_from_cells, DeltaMatrix, SparseMatrix};
use crate::txstore::{StoreError, TransactionStore, UpdateEvent};

#[derive(Debug, Error)]
pub enum OnlineError {
    #[error("no model: no ranking has been computed yet")]
    NoModel,
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Accumulated perturbation state between two solves.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationBudget {
    /// Frobenius norm of the composed pending delta ‖Δ‖_F.
    pub delta_frobenius: f64,
    /// ‖A‖_F at the last recompute.
    pub a_frobenius: f64,
    /// Eigengap δ at the last recompute.
    pub gap: f64,
    /// Current upper bound on ‖E‖_F, E = (A+Δ)ᵀ(A+Δ) − AᵀA.
    pub e_norm_bound: f64,
    /// Maximum admissible rotation bound (on sin θ).
    pub tau: f64,
}

impl PerturbationBudget {
    /// Fresh budget right after a solve: no pending perturbation.
    pub fn fresh(a_frobenius: f64, gap: f64, tau: f64) -> Self {
        assert!((0.0..1.0).contains(&tau), "tau must lie in [0, 1)");
        PerturbationBudget {
            delta_frobenius: 0.0,
            a_frobenius,
            gap,
            e_norm_bound: 0.0,
            tau,
        }
    }

    /// Budget after the pending delta changed. `pending` is the composed
    /// delta since the last solve (composition already cancels round-trip
    /// cells, so ‖Δ‖_F can shrink). The default bound is
    /// 2‖A‖_F‖Δ‖_F + ‖Δ‖_F², from E = ΔᵀA + AᵀΔ + ΔᵀΔ; passing the base
    /// matrix switches to the exact ‖E‖_F for tighter deferral.
    pub fn accumulate(&self, pending: &DeltaMatrix, exact_base: Option<&SparseMatrix>) -> Self {
        let df = pending.frobenius_norm();
        let e = match exact_base {
            Some(base) => exact_e_frobenius(base, pending),
            None => 2.0 * self.a_frobenius * df + df * df,
        };
        PerturbationBudget {
            delta_frobenius: df,
            e_norm_bound: e,
            ..*self
        }
    }
}

/// Outcome of [`rotation_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RotationBound {
    /// Valid upper bound on sin θ.
    Bound(f64),
    /// Perturbation ate half the gap (or the gap is gone); the bound formula
    /// no longer applies and a recompute is forced.
    Saturated,
}

/// Upper bound on the sine of the principal-eigenvector rotation induced by
/// the pending perturbation, or `Saturated` once ‖E‖_F ≥ δ/2.
pub fn rotation_bound(budget: &PerturbationBudget) -> RotationBound {
    let e = budget.e_norm_bound;
    if e < budget.gap / 2.0 {
        RotationBound::Bound(e / (budget.gap - e))
    } else {
        RotationBound::Saturated
    }
}

/// Exact ‖E‖_F for E = ΔᵀA + AᵀΔ + ΔᵀΔ, built sparsely from the pending
/// cells. Rows beyond the base matrix (transactions added since the last
/// solve) contribute only through ΔᵀΔ. Cost scales with the nonzeros of the
/// touched rows, not with the matrix.
pub fn exact_e_frobenius(base: &SparseMatrix, pending: &DeltaMatrix) -> f64 {
    let mut delta_rows: HashMap<u32, Vec<(u32, f64)>> = HashMap::new();
    for (r, c, old, new) in pending.cells() {
        delta_rows.entry(r).or_default().push((c, new - old));
    }
    let mut e: HashMap<(u32, u32), f64> = HashMap::new();
    for (&r, dcells) in &delta_rows {
        let base_row: &[(u32, f64)] = if (r as usize) < base.nrows() {
            base.row_entries(r)
        } else {
            &[]
        };
        for &(ci, di) in dcells {
            // ΔᵀA and its transpose AᵀΔ
            for &(cj, wj) in base_row {
                *e.entry((ci, cj)).or_insert(0.0) += di * wj;
                *e.entry((cj, ci)).or_insert(0.0) += wj * di;
            }
            // ΔᵀΔ
            for &(cj, dj) in dcells {
                *e.entry((ci, cj)).or_insert(0.0) += di * dj;
            }
        }
    }
    // fold from +0.0: an empty `sum()` yields -0.0, whose sign survives sqrt
    e.values().fold(0.0, |acc, x| acc + x * x).sqrt()
}

/// Weight of one item or transaction as served by a snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ItemWeight {
    Ranked(f64),
    /// Entered the store after the snapshot's solve; no weight yet.
    Pending,
}

/// Immutable published ranking.
#[derive(Debug, Clone)]
pub struct RankSnapshot {
    /// Store epoch at which the solve ran.
    pub epoch: u64,
    /// Item token → authority weight (catalog at solve time).
    pub authority: BTreeMap<String, f64>,
    /// Transaction id → hub weight (live transactions at solve time).
    pub hub: BTreeMap<String, f64>,
    /// Rotation bound accumulated since the solve; 0 right after it.
    pub staleness_bound: f64,
    pub degenerate: bool,
    pub converged: bool,
}

impl RankSnapshot {
    pub fn item_weight(&self, token: &str) -> ItemWeight {
        match self.authority.get(token) {
            Some(&w) => ItemWeight::Ranked(w),
            None => ItemWeight::Pending,
        }
    }

    pub fn transaction_weight(&self, tid: &str) -> ItemWeight {
        match self.hub.get(tid) {
            Some(&w) => ItemWeight::Ranked(w),
            None => ItemWeight::Pending,
        }
    }
}

fn snapshot_from_estimate(store: &TransactionStore, est: &EigenEstimate) -> RankSnapshot {
    let mut authority = BTreeMap::new();
    for (i, token) in store.item_tokens().iter().enumerate() {
        // sign fixing leaves at worst -1e-12 sized noise; serve 0 instead
        authority.insert(token.clone(), est.authority[i].max(0.0));
    }
    let mut hub = BTreeMap::new();
    for (row, tid, _) in store.transactions() {
        hub.insert(tid.to_string(), est.hub[row as usize].max(0.0));
    }
    RankSnapshot {
        epoch: store.epoch(),
        authority,
        hub,
        staleness_bound: 0.0,
        degenerate: est.degenerate,
        converged: est.converged,
    }
}

/// What [`Engine::submit`] did with the event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeferralDecision {
    /// Stale snapshot kept; `bound` is the refreshed staleness bound.
    Deferred { bound: f64 },
    /// Pending deltas applied and a fresh solve published. `bound` carries
    /// the rotation bound that breached τ, or `None` when the bound had
    /// saturated or the recompute was forced (cold start, degenerate or
    /// nonconverged previous solve).
    Recomputed { bound: Option<f64> },
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub tau: f64,
    pub solve: SolveOptions,
    /// Compute ‖E‖_F exactly instead of the cheap product bound.
    pub exact_e: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            tau: 0.01,
            solve: SolveOptions::default(),
            exact_e: false,
        }
    }
}

/// Counters for benchmarking the deferral policy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub solves: u64,
    pub solver_iterations: u64,
    pub deferrals: u64,
    pub recomputes: u64,
}

type SnapshotCell = ArcSwapOption<RankSnapshot>;

/// Cloneable read handle; `query` is wait-free and never blocks a writer.
#[derive(Clone)]
pub struct SnapshotReader {
    cell: Arc<SnapshotCell>,
}

impl SnapshotReader {
    pub fn query(&self) -> Option<Arc<RankSnapshot>> {
        self.cell.load_full()
    }
}

/// Single-writer ranking engine over an owned store.
pub struct Engine {
    store: TransactionStore,
    /// A at the last solve; pending deltas have not been applied to it.
    base: SparseMatrix,
    pending: DeltaMatrix,
    budget: PerturbationBudget,
    estimate: Option<EigenEstimate>,
    cell: Arc<SnapshotCell>,
    config: EngineConfig,
    stats: EngineStats,
}

impl Engine {
    /// Wrap a store without solving; the first submit (or `refresh`) computes
    /// and publishes the initial snapshot.
    pub fn new(store: TransactionStore, config: EngineConfig) -> Self {
        assert!(
            (0.0..1.0).contains(&config.tau),
            "tau must lie in [0, 1)"
        );
        let base = build_bipartite(&store);
        let budget = PerturbationBudget::fresh(base.frobenius_norm(), 0.0, config.tau);
        Engine {
            store,
            base,
            pending: DeltaMatrix::new(),
            budget,
            estimate: None,
            cell: Arc::new(ArcSwapOption::empty()),
            config,
            stats: EngineStats::default(),
        }
    }

    pub fn store(&self) -> &TransactionStore {
        &self.store
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn stats(&self) -> EngineStats {
        self.stats
    }

    pub fn budget(&self) -> &PerturbationBudget {
        &self.budget
    }

    pub fn estimate(&self) -> Option<&EigenEstimate> {
        self.estimate.as_ref()
    }

    /// Read handle that stays valid (and lock-free) while the engine keeps
    /// submitting; hand clones to query threads.
    pub fn reader(&self) -> SnapshotReader {
        SnapshotReader {
            cell: Arc::clone(&self.cell),
        }
    }

    /// Current published snapshot.
    pub fn query(&self) -> Result<Arc<RankSnapshot>, OnlineError> {
        self.cell.load_full().ok_or(OnlineError::NoModel)
    }

    /// Force a solve over all pending deltas and publish the result.
    pub fn refresh(&mut self) -> Result<DeferralDecision, OnlineError> {
        self.recompute(None);
        Ok(DeferralDecision::Recomputed { bound: None })
    }

    /// Apply one event; defer while the rotation bound stays within τ,
    /// otherwise recompute over everything pending.
    pub fn submit(&mut self, event: &UpdateEvent) -> Result<DeferralDecision, OnlineError> {
        let cells = self.store.apply_event(event)?;
        self.pending
            .absorb(&delta_from_cells(&cells, self.store.epoch()));
        let exact_base = self.config.exact_e.then_some(&self.base);
        self.budget = self.budget.accumulate(&self.pending, exact_base);

        let usable = self
            .estimate
            .as_ref()
            .is_some_and(|e| e.converged && !e.degenerate)
            && self.cell.load().is_some();
        if !usable {
            self.recompute(None);
            return Ok(DeferralDecision::Recomputed { bound: None });
        }
        match rotation_bound(&self.budget) {
            RotationBound::Bound(b) if b <= self.config.tau => {
                self.stats.deferrals += 1;
                let mut snap = self
                    .cell
                    .load_full()
                    .map(|s| (*s).clone())
                    .expect("usable implies published");
                snap.staleness_bound = b;
                self.cell.store(Some(Arc::new(snap)));
                Ok(DeferralDecision::Deferred { bound: b })
            }
            RotationBound::Bound(b) => {
                self.recompute(Some(b));
                Ok(DeferralDecision::Recomputed { bound: Some(b) })
            }
            RotationBound::Saturated => {
                self.recompute(None);
                Ok(DeferralDecision::Recomputed { bound: None })
            }
        }
    }

    fn recompute(&mut self, _breach: Option<f64>) {
        self.base
            .apply_delta(&self.pending, self.store.n_rows(), self.store.n_items());
        self.pending = DeltaMatrix::new();
        self.stats.recomputes += 1;

        if self.base.nnz() == 0 {
            // everything removed: publish an empty ranking and leave the
            // estimate unset so the next submit solves from scratch
            self.estimate = None;
            self.budget = PerturbationBudget::fresh(0.0, 0.0, self.config.tau);
            self.cell.store(Some(Arc::new(RankSnapshot {
                epoch: self.store.epoch(),
                authority: BTreeMap::new(),
                hub: BTreeMap::new(),
                staleness_bound: 0.0,
                degenerate: false,
                converged: true,
            })));
            return;
        }

        let warm = self.estimate.as_ref().map(|prev| {
            // stale-gap iteration budget, floored so a drifted gap estimate
            // cannot thrash the warm start
            let cap = suggested_max_iter(self.config.solve.tol, prev.lambda1, prev.lambda2);
            (prev.authority.clone(), prev.second.clone(), cap.max(1000))
        });
        let est = match warm {
            Some((v1, v2, cap)) => {
                let opts = SolveOptions {
                    max_iter: Some(cap),
                    ..self.config.solve.clone()
                };
                let warm_est = block_power_top2(&self.base, Some((&v1, &v2)), &opts)
                    .expect("nonzero matrix");
                if warm_est.converged {
                    warm_est
                } else {
                    // retry cold with the full budget before publishing a
                    // nonconverged estimate
                    self.stats.solves += 1;
                    self.stats.solver_iterations += warm_est.iterations as u64;
                    block_power_top2(&self.base, None, &self.config.solve)
                        .expect("nonzero matrix")
                }
            }
            None => {
                block_power_top2(&self.base, None, &self.config.solve).expect("nonzero matrix")
            }
        };
        self.stats.solves += 1;
        self.stats.solver_iterations += est.iterations as u64;
        self.budget = PerturbationBudget::fresh(
            self.base.frobenius_norm(),
            est.eigengap(),
            self.config.tau,
        );
        self.cell
            .store(Some(Arc::new(snapshot_from_estimate(&self.store, &est))));
        self.estimate = Some(est);
    }
}
