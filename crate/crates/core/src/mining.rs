//! Weighted frequent-itemset mining over hub-ranked transactions.
//!
//! Classical support counts every transaction once; here each transaction
//! counts with its hub weight, so ws(X) = Σ_{t ⊇ X} hub(t) / Σ_t hub(t).
//! The measure is anti-monotone (covers shrink, weights are nonnegative),
//! which licenses the levelwise Apriori search with subset pruning. A
//! brute-force enumerator over all 2ⁿ−1 itemsets serves as the oracle.
//!
//! Weighted supports are summed over cover rows in ascending row order in
//! both miners, so their outputs agree bitwise, not just within tolerance.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::online::RankSnapshot;
use crate::txstore::TransactionStore;

#[derive(Debug, Error)]
pub enum MiningError {
    #[error("no model: every transaction has zero hub weight")]
    NoModel,
    #[error("{what} threshold must lie in (0, 1], got {value}")]
    BadThreshold { what: &'static str, value: f64 },
    #[error("brute-force miner limited to {max} items, got {got}")]
    TooManyItems { max: usize, got: usize },
    #[error("frequent list is not subset-closed: missing {0:?}")]
    MissingSubset(Vec<String>),
}

/// An itemset with its hub-weighted support. `items` are token-sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedItemset {
    pub items: Vec<String>,
    pub wsupport: f64,
}

/// Association rule with weighted support and confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub antecedent: Vec<String>,
    pub consequent: Vec<String>,
    /// ws(antecedent ∪ consequent).
    pub wsupport: f64,
    /// ws(antecedent ∪ consequent) / ws(antecedent).
    pub wconfidence: f64,
}

/// Transactions flattened for mining: per live row its hub weight and item
/// memberships, re-indexed so that item index order is token-lexicographic.
struct MiningView {
    /// Lex-ordered item tokens; index in this list is the mining item index.
    tokens: Vec<String>,
    /// Per live row (ascending row order): (hub weight, sorted item indices).
    rows: Vec<(f64, Vec<u32>)>,
    total_hub: f64,
}

impl MiningView {
    fn build(store: &TransactionStore, snapshot: &RankSnapshot) -> Result<Self, MiningError> {
        let mut order: Vec<u32> = (0..store.n_items() as u32).collect();
        order.sort_by(|&a, &b| store.item_token(a).cmp(store.item_token(b)));
        let mut lex_rank = vec![0u32; store.n_items()];
        for (rank, &id) in order.iter().enumerate() {
            lex_rank[id as usize] = rank as u32;
        }
        let tokens: Vec<String> = order
            .iter()
            .map(|&id| store.item_token(id).to_string())
            .collect();

        let mut rows = Vec::new();
        let mut total_hub = 0.0;
        for (_, tid, items) in store.transactions() {
            // transactions unseen by the snapshot's solve carry no weight yet
            let hub = match snapshot.hub.get(tid) {
                Some(&w) => w.max(0.0),
                None => 0.0,
            };
            let mut indices: Vec<u32> = items.iter().map(|&i| lex_rank[i as usize]).collect();
            indices.sort_unstable();
            total_hub += hub;
            rows.push((hub, indices));
        }
        if !(total_hub > 0.0) {
            return Err(MiningError::NoModel);
        }
        Ok(MiningView {
            tokens,
            rows,
            total_hub,
        })
    }

    fn tokens_of(&self, indices: &[u32]) -> Vec<String> {
        indices
            .iter()
            .map(|&i| self.tokens[i as usize].clone())
            .collect()
    }
}

fn is_subset(needle: &[u32], haystack: &[u32]) -> bool {
    let mut it = haystack.iter();
    needle
        .iter()
        .all(|x| it.by_ref().any(|y| y == x))
}

/// ws(X): hub-weight share of the transactions covering X. Items unknown to
/// the catalog give 0.
pub fn w_support(
    items: &[&str],
    store: &TransactionStore,
    snapshot: &RankSnapshot,
) -> Result<f64, MiningError> {
    let view = MiningView::build(store, snapshot)?;
    let mut wanted = Vec::with_capacity(items.len());
    for token in items {
        match view.tokens.binary_search_by(|t| t.as_str().cmp(token)) {
            Ok(i) => wanted.push(i as u32),
            Err(_) => return Ok(0.0),
        }
    }
    wanted.sort_unstable();
    wanted.dedup();
    let mut covered = 0.0;
    for (hub, row) in &view.rows {
        if is_subset(&wanted, row) {
            covered += hub;
        }
    }
    Ok(covered / view.total_hub)
}

fn sort_itemsets(list: &mut [WeightedItemset]) {
    list.sort_by(|a, b| {
        a.items
            .len()
            .cmp(&b.items.len())
            .then_with(|| b.wsupport.partial_cmp(&a.wsupport).unwrap())
            .then_with(|| a.items.cmp(&b.items))
    });
}

/// All itemsets with ws ≥ minws, mined levelwise: size-(k+1) candidates are
/// joined from size-k survivors sharing a (k−1)-prefix, pruned when any
/// k-subset is missing, and scored over intersected covers.
pub fn mine_frequent(
    store: &TransactionStore,
    snapshot: &RankSnapshot,
    minws: f64,
) -> Result<Vec<WeightedItemset>, MiningError> {
    if !(minws > 0.0 && minws <= 1.0) {
        return Err(MiningError::BadThreshold { what: "support", value: minws });
    }
    let view = MiningView::build(store, snapshot)?;
    let n = view.tokens.len();

    // level 1: covers per item, ascending row order
    let mut covers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, (_, items)) in view.rows.iter().enumerate() {
        for &i in items {
            covers[i as usize].push(r);
        }
    }
    let ws_of = |cover: &[usize]| -> f64 {
        cover.iter().map(|&r| view.rows[r].0).sum::<f64>() / view.total_hub
    };

    let mut out: Vec<WeightedItemset> = Vec::new();
    // current level: (sorted item indices, cover)
    let mut level: Vec<(Vec<u32>, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let ws = ws_of(&covers[i]);
        if ws >= minws {
            out.push(WeightedItemset {
                items: vec![view.tokens[i].clone()],
                wsupport: ws,
            });
            level.push((vec![i as u32], std::mem::take(&mut covers[i])));
        }
    }

    while level.len() > 1 {
        let known: HashSet<&[u32]> = level.iter().map(|(items, _)| items.as_slice()).collect();
        let mut next: Vec<(Vec<u32>, Vec<usize>)> = Vec::new();
        for (ai, (a_items, a_cover)) in level.iter().enumerate() {
            for (b_items, b_cover) in &level[ai + 1..] {
                let k = a_items.len();
                if a_items[..k - 1] != b_items[..k - 1] {
                    // levels are sorted, so no later set shares the prefix
                    break;
                }
                let mut candidate = a_items.clone();
                candidate.push(b_items[k - 1]);
                // subset pruning: every k-subset must have survived
                let mut sub = Vec::with_capacity(k);
                let prune = (0..candidate.len() - 2).any(|skip| {
                    sub.clear();
                    sub.extend(
                        candidate
                            .iter()
                            .enumerate()
                            .filter(|&(i, _)| i != skip)
                            .map(|(_, &x)| x),
                    );
                    !known.contains(sub.as_slice())
                });
                if prune {
                    continue;
                }
                let cover: Vec<usize> = intersect_sorted(a_cover, b_cover);
                let ws = ws_of(&cover);
                if ws >= minws {
                    out.push(WeightedItemset {
                        items: view.tokens_of(&candidate),
                        wsupport: ws,
                    });
                    next.push((candidate, cover));
                }
            }
        }
        level = next;
    }

    sort_itemsets(&mut out);
    Ok(out)
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

const BRUTE_FORCE_MAX_ITEMS: usize = 16;

/// Oracle miner: enumerates every nonempty itemset over the catalog and
/// scores it by direct scan. Same output order as [`mine_frequent`].
pub fn brute_force_mine(
    store: &TransactionStore,
    snapshot: &RankSnapshot,
    minws: f64,
) -> Result<Vec<WeightedItemset>, MiningError> {
    if !(minws > 0.0 && minws <= 1.0) {
        return Err(MiningError::BadThreshold { what: "support", value: minws });
    }
    let n = store.n_items();
    if n > BRUTE_FORCE_MAX_ITEMS {
        return Err(MiningError::TooManyItems {
            max: BRUTE_FORCE_MAX_ITEMS,
            got: n,
        });
    }
    let view = MiningView::build(store, snapshot)?;
    let row_masks: Vec<u32> = view
        .rows
        .iter()
        .map(|(_, items)| items.iter().fold(0u32, |m, &i| m | (1 << i)))
        .collect();

    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let mut covered = 0.0;
        for (r, &row_mask) in row_masks.iter().enumerate() {
            if row_mask & mask == mask {
                covered += view.rows[r].0;
            }
        }
        let ws = covered / view.total_hub;
        if ws >= minws {
            let indices: Vec<u32> = (0..n as u32).filter(|i| mask & (1 << i) != 0).collect();
            out.push(WeightedItemset {
                items: view.tokens_of(&indices),
                wsupport: ws,
            });
        }
    }
    sort_itemsets(&mut out);
    Ok(out)
}

/// Rules P → X∖P for every frequent X (|X| ≥ 2) and nonempty proper subset
/// P with ws(X)/ws(P) ≥ minconf. The input must be subset-closed, which
/// [`mine_frequent`] guarantees.
pub fn generate_rules(
    frequent: &[WeightedItemset],
    minconf: f64,
) -> Result<Vec<Rule>, MiningError> {
    if !(minconf > 0.0 && minconf <= 1.0) {
        return Err(MiningError::BadThreshold { what: "confidence", value: minconf });
    }
    let ws_by_items: HashMap<&[String], f64> = frequent
        .iter()
        .map(|f| (f.items.as_slice(), f.wsupport))
        .collect();
    let mut rules = Vec::new();
    for set in frequent.iter().filter(|f| f.items.len() >= 2) {
        let k = set.items.len();
        for mask in 1u32..((1 << k) - 1) {
            let mut antecedent = Vec::new();
            let mut consequent = Vec::new();
            for (i, item) in set.items.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    antecedent.push(item.clone());
                } else {
                    consequent.push(item.clone());
                }
            }
            let ws_a = *ws_by_items
                .get(antecedent.as_slice())
                .ok_or_else(|| MiningError::MissingSubset(antecedent.clone()))?;
            // anti-monotonicity makes the ratio ≤ 1 up to rounding
            let confidence = (set.wsupport / ws_a).min(1.0);
            if confidence >= minconf {
                rules.push(Rule {
                    antecedent,
                    consequent,
                    wsupport: set.wsupport,
                    wconfidence: confidence,
                });
            }
        }
    }
    rules.sort_by(|a, b| {
        b.wconfidence
            .partial_cmp(&a.wconfidence)
            .unwrap()
            .then_with(|| b.wsupport.partial_cmp(&a.wsupport).unwrap())
            .then_with(|| a.antecedent.cmp(&b.antecedent))
            .then_with(|| a.consequent.cmp(&b.consequent))
    });
    Ok(rules)
}
