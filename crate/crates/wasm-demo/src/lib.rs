//! Browser-facing wrappers around the core engine. Each export takes plain
//! text in and returns a JSON string, so the page needs no generated
//! bindings beyond the functions themselves. The `*_json` functions hold the
//! actual logic and run on any target, which keeps them testable off-wasm.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use warm_core::eigen::{block_power_top2, SolveOptions};
use warm_core::graph::{build_bipartite, build_item_graph};
use warm_core::mining::{generate_rules, mine_frequent};
use warm_core::online::{DeferralDecision, Engine, EngineConfig};
use warm_core::txstore::{parse_baskets, parse_update_stream};

#[derive(Serialize)]
struct ItemRow {
    item: String,
    weight: f64,
}

#[derive(Serialize)]
struct RankOut {
    items: Vec<ItemRow>,
    lambda1: f64,
    lambda2: f64,
    eigengap: f64,
    iterations: usize,
    converged: bool,
    degenerate: bool,
}

#[derive(Serialize)]
struct EventRow {
    seq: u64,
    decision: &'static str,
    bound: Option<f64>,
}

#[derive(Serialize)]
struct TxRow {
    tid: String,
    weight: f64,
}

#[derive(Serialize)]
struct ReplayOut {
    events: Vec<EventRow>,
    deferred: usize,
    recomputed: usize,
    items: Vec<ItemRow>,
    transactions: Vec<TxRow>,
}

#[derive(Serialize)]
struct SetRow {
    items: Vec<String>,
    wsupport: f64,
}

#[derive(Serialize)]
struct RuleRow {
    antecedent: Vec<String>,
    consequent: Vec<String>,
    wsupport: f64,
    wconfidence: f64,
}

#[derive(Serialize)]
struct MineOut {
    itemsets: Vec<SetRow>,
    rules: Vec<RuleRow>,
}

fn sorted_items(pairs: impl IntoIterator<Item = (String, f64)>) -> Vec<ItemRow> {
    let mut rows: Vec<ItemRow> = pairs
        .into_iter()
        .map(|(item, w)| ItemRow {
            item,
            weight: w.max(0.0),
        })
        .collect();
    rows.sort_by(|a, b| {
        b.weight
            .partial_cmp(&a.weight)
            .unwrap()
            .then_with(|| a.item.cmp(&b.item))
    });
    rows
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Ranks the items of a basket text. `mode` is `bipartite` or `itemgraph`;
/// `min_pair_count` only matters for the latter.
pub fn rank_json(baskets: &str, mode: &str, min_pair_count: usize) -> Result<String, String> {
    let store = parse_baskets(baskets).map_err(|e| e.to_string())?;
    let matrix = match mode {
        "bipartite" => build_bipartite(&store),
        "itemgraph" => build_item_graph(&store, min_pair_count),
        other => return Err(format!("unknown mode {other:?}")),
    };
    let est =
        block_power_top2(&matrix, None, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let items = sorted_items(
        store
            .item_tokens()
            .iter()
            .enumerate()
            .map(|(i, token)| (token.clone(), est.authority[i])),
    );
    to_json(&RankOut {
        items,
        lambda1: est.lambda1,
        lambda2: est.lambda2,
        eigengap: est.eigengap(),
        iterations: est.iterations,
        converged: est.converged,
        degenerate: est.degenerate,
    })
}

/// Replays an update stream against the online engine and reports every
/// defer/recompute decision plus the final ranking.
pub fn replay_json(
    baskets: &str,
    updates: &str,
    tau: f64,
    exact_e: bool,
) -> Result<String, String> {
    if !(0.0..1.0).contains(&tau) {
        return Err(format!("tau must be in [0, 1), got {tau}"));
    }
    let store = parse_baskets(baskets).map_err(|e| e.to_string())?;
    let events = parse_update_stream(updates).map_err(|e| e.to_string())?;
    let mut engine = Engine::new(
        store,
        EngineConfig {
            tau,
            exact_e,
            ..EngineConfig::default()
        },
    );
    engine.refresh().map_err(|e| e.to_string())?;
    let mut rows = Vec::with_capacity(events.len());
    let mut deferred = 0;
    let mut recomputed = 0;
    for event in &events {
        let decision = engine
            .submit(event)
            .map_err(|e| format!("event {}: {e}", event.seq))?;
        let (decision, bound) = match decision {
            DeferralDecision::Deferred { bound } => {
                deferred += 1;
                ("deferred", Some(bound))
            }
            DeferralDecision::Recomputed { bound } => {
                recomputed += 1;
                ("recomputed", bound)
            }
        };
        rows.push(EventRow {
            seq: event.seq,
            decision,
            bound,
        });
    }
    let snapshot = engine.query().map_err(|e| e.to_string())?;
    let items = sorted_items(snapshot.authority.iter().map(|(k, v)| (k.clone(), *v)));
    let mut transactions: Vec<TxRow> = snapshot
        .hub
        .iter()
        .map(|(tid, w)| TxRow {
            tid: tid.clone(),
            weight: w.max(0.0),
        })
        .collect();
    transactions.sort_by(|a, b| {
        b.weight
            .partial_cmp(&a.weight)
            .unwrap()
            .then_with(|| a.tid.cmp(&b.tid))
    });
    to_json(&ReplayOut {
        events: rows,
        deferred,
        recomputed,
        items,
        transactions,
    })
}

/// Mines weighted frequent itemsets and rules from a basket text.
pub fn mine_json(baskets: &str, minws: f64, minconf: f64) -> Result<String, String> {
    let store = parse_baskets(baskets).map_err(|e| e.to_string())?;
    let mut engine = Engine::new(store, EngineConfig::default());
    engine.refresh().map_err(|e| e.to_string())?;
    let snapshot = engine.query().map_err(|e| e.to_string())?;
    let frequent =
        mine_frequent(engine.store(), &snapshot, minws).map_err(|e| e.to_string())?;
    let rules = generate_rules(&frequent, minconf).map_err(|e| e.to_string())?;
    to_json(&MineOut {
        itemsets: frequent
            .iter()
            .map(|set| SetRow {
                items: set.items.clone(),
                wsupport: set.wsupport,
            })
            .collect(),
        rules: rules
            .iter()
            .map(|rule| RuleRow {
                antecedent: rule.antecedent.clone(),
                consequent: rule.consequent.clone(),
                wsupport: rule.wsupport,
                wconfidence: rule.wconfidence,
            })
            .collect(),
    })
}

#[wasm_bindgen]
pub fn rank_baskets(baskets: &str, mode: &str, min_pair_count: usize) -> Result<String, JsError> {
    rank_json(baskets, mode, min_pair_count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn replay_stream(
    baskets: &str,
    updates: &str,
    tau: f64,
    exact_e: bool,
) -> Result<String, JsError> {
    replay_json(baskets, updates, tau, exact_e).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn mine_rules(baskets: &str, minws: f64, minconf: f64) -> Result<String, JsError> {
    mine_json(baskets, minws, minconf).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    const WORKED: &str = "1 2\n2 3\n2\n";

    #[test]
    fn rank_reports_worked_values() {
        let parsed: Value = serde_json::from_str(&rank_json(WORKED, "bipartite", 1).unwrap())
            .expect("valid JSON");
        let items = parsed["items"].as_array().unwrap();
        assert_eq!(items.len(), 3);
        assert_eq!(items[0]["item"], "2");
        assert!((items[0]["weight"].as_f64().unwrap() - 0.8881).abs() < 1e-3);
        assert!((parsed["lambda1"].as_f64().unwrap() - (2.0 + 3.0f64.sqrt())).abs() < 1e-6);
        assert_eq!(parsed["converged"], Value::Bool(true));
    }

    #[test]
    fn rank_rejects_unknown_mode_and_empty_text() {
        assert!(rank_json(WORKED, "hexagonal", 1).unwrap_err().contains("mode"));
        assert!(rank_json("", "bipartite", 1)
            .unwrap_err()
            .contains("empty model"));
    }

    #[test]
    fn replay_reports_decisions_and_final_ranking() {
        let parsed: Value =
            serde_json::from_str(&replay_json(WORKED, "A t4 b\nD t4\n", 0.5, false).unwrap())
                .expect("valid JSON");
        let events = parsed["events"].as_array().unwrap();
        assert_eq!(events.len(), 2);
        assert_eq!(events[0]["seq"], 1);
        assert_eq!(events[0]["decision"], "recomputed");
        assert_eq!(
            parsed["deferred"].as_u64().unwrap() + parsed["recomputed"].as_u64().unwrap(),
            2
        );
        assert_eq!(parsed["items"][0]["item"], "2");
        assert_eq!(parsed["transactions"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn replay_validates_tau() {
        assert!(replay_json(WORKED, "", 1.0, false).unwrap_err().contains("tau"));
    }

    #[test]
    fn mine_matches_worked_rules() {
        let parsed: Value = serde_json::from_str(&mine_json(WORKED, 0.3, 0.9).unwrap())
            .expect("valid JSON");
        assert_eq!(parsed["itemsets"].as_array().unwrap().len(), 5);
        let rules = parsed["rules"].as_array().unwrap();
        assert_eq!(rules.len(), 2);
        assert_eq!(rules[0]["antecedent"][0], "1");
        assert_eq!(rules[0]["consequent"][0], "2");
        assert!((rules[0]["wconfidence"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mine_propagates_threshold_errors() {
        assert!(mine_json(WORKED, 0.0, 0.5).unwrap_err().contains("support"));
        assert!(mine_json(WORKED, 0.5, 1.5)
            .unwrap_err()
            .contains("confidence"));
    }
}
