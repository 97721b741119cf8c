//! Transaction ranking and weighted itemset mining over an evolving basket
//! database.
//!
//! The pipeline: [`txstore`] holds the transactions and turns updates into
//! cell deltas; [`graph`] builds the sparse matrix A (bipartite
//! transaction-by-item by default, item co-occurrence as an alternate mode);
//! [`eigen`] extracts the top-2 eigenpairs of AᵀA, giving authority (item)
//! and hub (transaction) rankings plus the eigengap; [`online`] keeps ranks
//! live under updates, deferring recomputes while a perturbation bound stays
//! within tolerance; [`mining`] runs weighted-support Apriori over hub
//! weights. [`synth`] generates seeded workloads and the deferral benchmark.

pub mod eigen;
pub mod graph;
pub mod mining;
pub mod online;
pub mod synth;
pub mod txstore;
