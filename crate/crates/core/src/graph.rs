//! Matrix construction and update deltas.
//!
//! Two builders produce the ranked matrix A: the bipartite transaction-by-item
//! form (the default, and the only one the miner consumes) and an item-by-item
//! co-occurrence graph. Entries are unweighted 0/1 by default; a per-item
//! weight vector can scale columns at build time for callers that want
//! non-uniform item importance.

use std::collections::BTreeMap;

use crate::txstore::{CellChange, TransactionStore};

/// Row-major sparse matrix with strictly positive entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    /// Per row: (col, weight) sorted by col. Zero entries are absent.
    rows: Vec<Vec<(u32, f64)>>,
}

impl SparseMatrix {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, row: u32, col: u32) -> f64 {
        debug_assert!((row as usize) < self.nrows && (col as usize) < self.ncols);
        match self.rows[row as usize].binary_search_by_key(&col, |&(c, _)| c) {
            Ok(i) => self.rows[row as usize][i].1,
            Err(_) => 0.0,
        }
    }

    /// Set an entry; `weight == 0.0` removes it.
    pub fn set(&mut self, row: u32, col: u32, weight: f64) {
        assert!((row as usize) < self.nrows && (col as usize) < self.ncols);
        assert!(weight >= 0.0 && weight.is_finite());
        let entries = &mut self.rows[row as usize];
        match entries.binary_search_by_key(&col, |&(c, _)| c) {
            Ok(i) => {
                if weight == 0.0 {
                    entries.remove(i);
                } else {
                    entries[i].1 = weight;
                }
            }
            Err(i) => {
                if weight != 0.0 {
                    entries.insert(i, (col, weight));
                }
            }
        }
    }

    pub fn row_entries(&self, row: u32) -> &[(u32, f64)] {
        &self.rows[row as usize]
    }

    /// y = A x, with x of length `ncols`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(c, w)| w * x[c as usize]).sum())
            .collect()
    }

    /// y = Aᵀ x, with x of length `nrows`.
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut out = vec![0.0; self.ncols];
        for (r, row) in self.rows.iter().enumerate() {
            let xr = x[r];
            if xr == 0.0 {
                continue;
            }
            for &(c, w) in row {
                out[c as usize] += w * xr;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        // fold from +0.0: an empty `sum()` yields -0.0, whose sign survives sqrt
        self.rows
            .iter()
            .flatten()
            .fold(0.0, |acc, &(_, w)| acc + w * w)
            .sqrt()
    }

    /// Apply a delta in place, growing to `nrows` x `ncols` first. The target
    /// dimensions are explicit because a delta whose cells cancelled out still
    /// has to carry the store's growth.
    pub fn apply_delta(&mut self, delta: &DeltaMatrix, nrows: usize, ncols: usize) {
        assert!(nrows >= self.nrows && ncols >= self.ncols);
        self.nrows = nrows;
        self.ncols = ncols;
        self.rows.resize(nrows, Vec::new());
        for (&(row, col), &(old, new)) in &delta.cells {
            debug_assert!(
                (self.get(row, col) - old).abs() < 1e-12,
                "delta old weight out of step with matrix"
            );
            self.set(row, col, new);
        }
    }

    /// Dense copy, row-major. Intended for the small oracles and tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, w) in row {
                dense[r][c as usize] = w;
            }
        }
        dense
    }
}

/// Accumulated cell-level change between two matrix states.
///
/// Composition keeps the earliest old weight and the latest new weight per
/// cell; a cell whose old and new weights end up equal is dropped entirely.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DeltaMatrix {
    cells: BTreeMap<(u32, u32), (f64, f64)>,
    /// Store epochs [from, to] this delta spans; None when empty of history.
    covers_epochs: Option<(u64, u64)>,
}

impl DeltaMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn covers_epochs(&self) -> Option<(u64, u64)> {
        self.covers_epochs
    }

    pub fn cells(&self) -> impl Iterator<Item = (u32, u32, f64, f64)> + '_ {
        self.cells
            .iter()
            .map(|(&(r, c), &(old, new))| (r, c, old, new))
    }

    /// Frobenius norm of the net change (new minus old, per cell).
    pub fn frobenius_norm(&self) -> f64 {
        // fold from +0.0: an empty `sum()` yields -0.0, whose sign survives sqrt
        self.cells
            .values()
            .fold(0.0, |acc, &(old, new)| acc + (new - old) * (new - old))
            .sqrt()
    }

    /// Merge a later delta into this one.
    pub fn absorb(&mut self, later: &DeltaMatrix) {
        for (&key, &(old, new)) in &later.cells {
            match self.cells.entry(key) {
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let earliest_old = e.get().0;
                    if earliest_old == new {
                        e.remove();
                    } else {
                        e.insert((earliest_old, new));
                    }
                }
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert((old, new));
                }
            }
        }
        self.covers_epochs = match (self.covers_epochs, later.covers_epochs) {
            (Some((a, _)), Some((_, d))) => Some((a, d)),
            (span, None) => span,
            (None, span) => span,
        };
    }
}

/// Package the cell changes of one applied event.
pub fn delta_from_cells(cells: &[CellChange], epoch: u64) -> DeltaMatrix {
    let mut delta = DeltaMatrix {
        cells: BTreeMap::new(),
        covers_epochs: Some((epoch, epoch)),
    };
    for c in cells {
        if c.old != c.new {
            delta.cells.insert((c.row, c.col), (c.old, c.new));
        }
    }
    delta
}

/// The m x n 0/1 transaction-by-item matrix. Retired rows stay as all-zero
/// rows so row indices line up with the store for the whole run.
pub fn build_bipartite(store: &TransactionStore) -> SparseMatrix {
    build_bipartite_scaled(store, None)
}

/// Bipartite matrix with optional per-item column weights (the node-weight
/// hook). `item_weights[i]` scales column i; entries must be positive.
pub fn build_bipartite_scaled(
    store: &TransactionStore,
    item_weights: Option<&[f64]>,
) -> SparseMatrix {
    let n = store.n_items();
    if let Some(w) = item_weights {
        assert_eq!(w.len(), n, "one weight per catalog item");
        assert!(
            w.iter().all(|&x| x > 0.0 && x.is_finite()),
            "item weights must be positive"
        );
    }
    let mut a = SparseMatrix::zero(store.n_rows(), n);
    for (row, _, items) in store.transactions() {
        a.rows[row as usize] = items
            .iter()
            .map(|&i| (i, item_weights.map_or(1.0, |w| w[i as usize])))
            .collect();
    }
    a
}

/// The n x n item co-occurrence graph: entry (i, j), i != j, is 1 iff at
/// least `max(1, min_pair_count)` live transactions contain both items.
pub fn build_item_graph(store: &TransactionStore, min_pair_count: usize) -> SparseMatrix {
    let floor = min_pair_count.max(1);
    let mut pair_counts: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for (_, _, items) in store.transactions() {
        for (k, &i) in items.iter().enumerate() {
            for &j in &items[k + 1..] {
                *pair_counts.entry((i, j)).or_insert(0) += 1;
            }
        }
    }
    let n = store.n_items();
    let mut a = SparseMatrix::zero(n, n);
    for (&(i, j), &count) in &pair_counts {
        if count >= floor {
            a.set(i, j, 1.0);
            a.set(j, i, 1.0);
        }
    }
    a
}
