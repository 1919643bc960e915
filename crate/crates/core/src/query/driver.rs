//! Level-by-level scheduling shared by range and kNN search.

use crate::error::{Error, Result};
use crate::index::GtsIndex;
use crate::runtime::MemoryBudget;

use super::{compute_query_groups, CandidateEntry, LevelTrace};

/// Rows a group may hold at `layer` so that expanding it, and every level
/// below it, stays within `available` units:
/// `available / ((split_rounds − layer + 1) · nc)`.
pub fn size_limit(available: usize, split_rounds: usize, layer: usize, nc: usize) -> usize {
    debug_assert!((1..=split_rounds).contains(&layer));
    available / ((split_rounds - layer + 1) * nc)
}

/// The kind-specific half of a search.
pub(super) trait LevelSearch {
    /// Children of `rows` that survive pruning, grouped by query in
    /// ascending query order.
    fn expand(&mut self, rows: &[CandidateEntry]) -> Result<Vec<CandidateEntry>>;
    /// Computes true distances inside the leaves named by `rows`.
    fn verify(&mut self, rows: &[CandidateEntry]);
}

/// Units a batch needs besides its root rows: one full expansion per split
/// round keeps every level's limit at one row or more.
fn headroom(index: &GtsIndex) -> usize {
    index.nodes().split_rounds() * index.node_capacity()
}

/// Drives `search` from `roots` (one root row per query, ascending query)
/// down to the leaves. Root rows are admitted in chunks that leave enough
/// headroom for the deepest descent.
pub(super) fn run<S: LevelSearch>(
    index: &GtsIndex,
    budget: &mut MemoryBudget,
    search: &mut S,
    roots: Vec<CandidateEntry>,
) -> Result<Vec<LevelTrace>> {
    let mut trace = Vec::new();
    if index.is_empty() || roots.is_empty() {
        return Ok(trace);
    }
    let required = headroom(index) + 1;
    if budget.available() < required {
        return Err(Error::BudgetTooSmall {
            capacity: budget.available(),
            required,
        });
    }
    let per_chunk = budget.available() - headroom(index);
    for chunk in roots.chunks(per_chunk) {
        reserve(budget, chunk.len())?;
        descend(index, budget, search, chunk.to_vec(), 1, &mut trace)?;
    }
    Ok(trace)
}

fn reserve(budget: &mut MemoryBudget, units: usize) -> Result<()> {
    budget.reserve(units).map_err(|o| Error::BudgetTooSmall {
        capacity: o.available,
        required: o.requested,
    })
}

/// `rows` are already reserved; they are released before returning.
fn descend<S: LevelSearch>(
    index: &GtsIndex,
    budget: &mut MemoryBudget,
    search: &mut S,
    rows: Vec<CandidateEntry>,
    layer: usize,
    trace: &mut Vec<LevelTrace>,
) -> Result<()> {
    let nodes = index.nodes();
    if layer == nodes.levels() {
        search.verify(&rows);
        budget.release(rows.len());
        return Ok(());
    }

    let nc = index.node_capacity();
    let available = budget.available();
    let limit = size_limit(available, nodes.split_rounds(), layer, nc);
    debug_assert!(limit >= 1, "headroom keeps the limit positive");
    let limit = limit.max(1);
    let groups = compute_query_groups(&rows, limit);

    let at = trace.len();
    trace.push(LevelTrace {
        layer,
        split_rounds: nodes.split_rounds(),
        node_capacity: nc,
        available,
        size_limit: limit,
        rows: rows.len(),
        groups: groups.len(),
        max_expanded: 0,
    });

    for group in &groups {
        // A single query larger than the limit is processed in slices.
        for slice in rows[group.rows.clone()].chunks(limit) {
            let children = search.expand(slice)?;
            trace[at].max_expanded = trace[at].max_expanded.max(children.len());
            if children.is_empty() {
                continue;
            }
            reserve(budget, children.len())?;
            descend(index, budget, search, children, layer + 1, trace)?;
        }
    }
    budget.release(rows.len());
    Ok(())
}
