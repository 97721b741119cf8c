//! The evolving transaction database.
//!
//! A store owns the baskets, assigns dense column indices to item tokens and
//! dense row indices to transaction ids, and turns update events into the raw
//! cell changes that downstream matrix deltas are built from. Row and column
//! indices are never reused within a run: removing a transaction retires its
//! row (it becomes all-zero in the bipartite matrix) so that accumulated
//! deltas stay valid between recomputes.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

/// Dense column index of an item token.
pub type ItemId = u32;
/// Dense row index of a transaction.
pub type RowId = u32;

#[derive(Debug, Error)]
pub enum StoreError {
    // the cause is attached as the error source, not inlined, so chained
    // reporters do not print it twice
    #[error("cannot read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("transaction id `{0}` already exists")]
    DuplicateTid(String),
    #[error("unknown transaction id `{0}`")]
    UnknownTid(String),
    #[error("modification would leave transaction `{0}` empty")]
    WouldEmpty(String),
    #[error("modify event for `{0}` adds and removes the same item")]
    AddRemoveOverlap(String),
    #[error("transaction `{0}` has no items")]
    NoItems(String),
}

/// A single mutation of the database.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    /// Insert a new transaction. The tid must not be live.
    Add { tid: String, items: Vec<String> },
    /// Retire a live transaction.
    Remove { tid: String },
    /// Edit the item set of a live transaction in place.
    Modify {
        tid: String,
        added: Vec<String>,
        removed: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateEvent {
    /// Monotone sequence number (line number when read from a stream file).
    pub seq: u64,
    pub kind: EventKind,
}

impl UpdateEvent {
    pub fn add(seq: u64, tid: impl Into<String>, items: &[&str]) -> Self {
        UpdateEvent {
            seq,
            kind: EventKind::Add {
                tid: tid.into(),
                items: items.iter().map(|s| s.to_string()).collect(),
            },
        }
    }

    pub fn remove(seq: u64, tid: impl Into<String>) -> Self {
        UpdateEvent {
            seq,
            kind: EventKind::Remove { tid: tid.into() },
        }
    }

    pub fn modify(seq: u64, tid: impl Into<String>, added: &[&str], removed: &[&str]) -> Self {
        UpdateEvent {
            seq,
            kind: EventKind::Modify {
                tid: tid.into(),
                added: added.iter().map(|s| s.to_string()).collect(),
                removed: removed.iter().map(|s| s.to_string()).collect(),
            },
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventKind::Add { tid, .. } => write!(f, "add {tid}"),
            EventKind::Remove { tid } => write!(f, "remove {tid}"),
            EventKind::Modify { tid, .. } => write!(f, "modify {tid}"),
        }
    }
}

/// One changed entry of the bipartite transaction-by-item matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellChange {
    pub row: RowId,
    pub col: ItemId,
    pub old: f64,
    pub new: f64,
}

/// The transaction database with stable item and row indexing.
#[derive(Debug, Clone, Default)]
pub struct TransactionStore {
    /// Row index -> sorted item ids; `None` marks a retired row.
    rows: Vec<Option<Vec<ItemId>>>,
    /// Row index -> tid of the transaction that owns (or owned) the row.
    row_tids: Vec<String>,
    /// Live tid -> row index.
    live: HashMap<String, RowId>,
    /// Item id -> token, in first-appearance order.
    items: Vec<String>,
    item_ids: HashMap<String, ItemId>,
    epoch: u64,
}

impl TransactionStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of item columns ever observed (n).
    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    /// Number of row indices ever assigned (m), retired rows included.
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Number of live transactions.
    pub fn live_count(&self) -> usize {
        self.live.len()
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn item_token(&self, id: ItemId) -> &str {
        &self.items[id as usize]
    }

    pub fn item_id(&self, token: &str) -> Option<ItemId> {
        self.item_ids.get(token).copied()
    }

    /// All item tokens in catalog (column) order.
    pub fn item_tokens(&self) -> &[String] {
        &self.items
    }

    pub fn row_of(&self, tid: &str) -> Option<RowId> {
        self.live.get(tid).copied()
    }

    pub fn tid_of_row(&self, row: RowId) -> &str {
        &self.row_tids[row as usize]
    }

    /// Item ids of the transaction at `row`, or `None` for retired rows.
    pub fn row_items(&self, row: RowId) -> Option<&[ItemId]> {
        self.rows[row as usize].as_deref()
    }

    /// Live transactions in row order: `(row, tid, sorted item ids)`.
    ///
    /// Row order is the deterministic iteration order used everywhere a
    /// floating-point sum over transactions is formed.
    pub fn transactions(&self) -> impl Iterator<Item = (RowId, &str, &[ItemId])> {
        self.rows.iter().enumerate().filter_map(move |(r, slot)| {
            slot.as_deref()
                .map(|items| (r as RowId, self.row_tids[r].as_str(), items))
        })
    }

    fn intern_item(&mut self, token: &str) -> ItemId {
        if let Some(&id) = self.item_ids.get(token) {
            return id;
        }
        let id = self.items.len() as ItemId;
        self.items.push(token.to_string());
        self.item_ids.insert(token.to_string(), id);
        id
    }

    /// Dedup a token list into sorted item ids, interning new tokens in the
    /// order they appear.
    fn intern_set(&mut self, tokens: &[String]) -> Vec<ItemId> {
        let mut ids: Vec<ItemId> = tokens.iter().map(|t| self.intern_item(t)).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    fn push_transaction(&mut self, tid: String, items: Vec<ItemId>) -> RowId {
        let row = self.rows.len() as RowId;
        self.rows.push(Some(items));
        self.row_tids.push(tid.clone());
        self.live.insert(tid, row);
        row
    }

    /// Apply one update event, returning the changed matrix cells.
    ///
    /// Cells list added entries first, then removed ones, each group in item
    /// id order. The epoch increases by exactly one on success and is left
    /// untouched on error.
    pub fn apply_event(&mut self, event: &UpdateEvent) -> Result<Vec<CellChange>, StoreError> {
        let cells = match &event.kind {
            EventKind::Add { tid, items } => {
                if self.live.contains_key(tid) {
                    return Err(StoreError::DuplicateTid(tid.clone()));
                }
                let ids = self.intern_set(items);
                if ids.is_empty() {
                    return Err(StoreError::NoItems(tid.clone()));
                }
                let row = self.push_transaction(tid.clone(), ids.clone());
                ids.into_iter()
                    .map(|col| CellChange {
                        row,
                        col,
                        old: 0.0,
                        new: 1.0,
                    })
                    .collect()
            }
            EventKind::Remove { tid } => {
                let row = self
                    .live
                    .remove(tid)
                    .ok_or_else(|| StoreError::UnknownTid(tid.clone()))?;
                let items = self.rows[row as usize].take().expect("live row present");
                items
                    .into_iter()
                    .map(|col| CellChange {
                        row,
                        col,
                        old: 1.0,
                        new: 0.0,
                    })
                    .collect()
            }
            EventKind::Modify {
                tid,
                added,
                removed,
            } => {
                let row = *self
                    .live
                    .get(tid)
                    .ok_or_else(|| StoreError::UnknownTid(tid.clone()))?;
                let add_ids = self.intern_set(added);
                let mut rm_ids: Vec<ItemId> = removed
                    .iter()
                    .filter_map(|t| self.item_ids.get(t).copied())
                    .collect();
                rm_ids.sort_unstable();
                rm_ids.dedup();
                if add_ids.iter().any(|id| rm_ids.contains(id)) {
                    return Err(StoreError::AddRemoveOverlap(tid.clone()));
                }
                let current = self.rows[row as usize].as_ref().expect("live row present");
                // Only entries that actually flip produce cells.
                let add_eff: Vec<ItemId> = add_ids
                    .iter()
                    .copied()
                    .filter(|id| current.binary_search(id).is_err())
                    .collect();
                let rm_eff: Vec<ItemId> = rm_ids
                    .iter()
                    .copied()
                    .filter(|id| current.binary_search(id).is_ok())
                    .collect();
                if current.len() + add_eff.len() == rm_eff.len() {
                    return Err(StoreError::WouldEmpty(tid.clone()));
                }
                let slot = self.rows[row as usize].as_mut().expect("live row present");
                slot.retain(|id| !rm_eff.contains(id));
                slot.extend_from_slice(&add_eff);
                slot.sort_unstable();
                let mut cells: Vec<CellChange> = add_eff
                    .into_iter()
                    .map(|col| CellChange {
                        row,
                        col,
                        old: 0.0,
                        new: 1.0,
                    })
                    .collect();
                cells.extend(rm_eff.into_iter().map(|col| CellChange {
                    row,
                    col,
                    old: 1.0,
                    new: 0.0,
                }));
                cells
            }
        };
        self.epoch += 1;
        Ok(cells)
    }
}

fn split_basket_line(line: &str) -> Vec<&str> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .collect()
}

/// Parse basket text: one transaction per line, items separated by whitespace
/// or commas, `#` starts a comment, blank lines ignored. Tids are assigned
/// sequentially from 1.
pub fn parse_baskets(text: &str) -> Result<TransactionStore, StoreError> {
    let mut store = TransactionStore::new();
    let mut next_tid = 1u64;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens = split_basket_line(line);
        if tokens.is_empty() {
            return Err(StoreError::Parse {
                line: lineno + 1,
                msg: "transaction has no items".into(),
            });
        }
        let owned: Vec<String> = tokens.iter().map(|t| t.to_string()).collect();
        let ids = store.intern_set(&owned);
        store.push_transaction(next_tid.to_string(), ids);
        next_tid += 1;
    }
    Ok(store)
}

/// Load a basket file from disk. See [`parse_baskets`] for the format.
pub fn load_basket_file(path: impl AsRef<Path>) -> Result<TransactionStore, StoreError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| StoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_baskets(&text)
}

/// Parse an update stream: one event per line, `A <tid> <item>...`,
/// `D <tid>`, or `M <tid> [+<item>|-<item>]...`. Blank and `#` lines are
/// skipped; `seq` is the 1-based line number.
pub fn parse_update_stream(text: &str) -> Result<Vec<UpdateEvent>, StoreError> {
    let mut events = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let seq = (lineno + 1) as u64;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let op = tokens.next().expect("nonblank line has a token");
        let parse_err = |msg: String| StoreError::Parse {
            line: lineno + 1,
            msg,
        };
        let tid = tokens
            .next()
            .ok_or_else(|| parse_err("missing transaction id".into()))?
            .to_string();
        let kind = match op {
            "A" => {
                let items: Vec<String> = tokens.map(|t| t.to_string()).collect();
                if items.is_empty() {
                    return Err(parse_err(format!("add event for `{tid}` lists no items")));
                }
                EventKind::Add { tid, items }
            }
            "D" => {
                if tokens.next().is_some() {
                    return Err(parse_err("trailing tokens after remove event".into()));
                }
                EventKind::Remove { tid }
            }
            "M" => {
                let mut added = Vec::new();
                let mut removed = Vec::new();
                let mut any = false;
                for t in tokens {
                    any = true;
                    if let Some(item) = t.strip_prefix('+') {
                        added.push(item.to_string());
                    } else if let Some(item) = t.strip_prefix('-') {
                        removed.push(item.to_string());
                    } else {
                        return Err(parse_err(format!(
                            "modify change `{t}` must start with + or -"
                        )));
                    }
                }
                if !any {
                    return Err(parse_err(format!(
                        "modify event for `{tid}` lists no changes"
                    )));
                }
                EventKind::Modify {
                    tid,
                    added,
                    removed,
                }
            }
            other => {
                return Err(parse_err(format!(
                    "unknown event kind `{other}` (expected A, D, or M)"
                )))
            }
        };
        events.push(UpdateEvent { seq, kind });
    }
    Ok(events)
}

/// Load an update-stream file from disk. See [`parse_update_stream`].
pub fn load_update_stream(path: impl AsRef<Path>) -> Result<Vec<UpdateEvent>, StoreError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| StoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_update_stream(&text)
}
