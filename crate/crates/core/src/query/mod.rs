//! Exact batch range and kNN search.
//!
//! Both searches descend the tree one level at a time for a whole batch.
//! The live state is a table of [`CandidateEntry`] rows, one per
//! (node, query) pair still worth visiting. Before each level the rows are
//! split into [`QueryGroup`]s small enough that their expansion fits in the
//! remaining [`MemoryBudget`]; groups run one after another, rows inside a
//! group run in parallel. Leaves are verified by computing true distances
//! for the entries that survive the pivot filter.

mod driver;
mod knn;
mod range;

use std::ops::Range;

use serde::Serialize;

use crate::error::Result;
use crate::index::{GtsIndex, TreeNode};
use crate::metric::Payload;
use crate::runtime::{MemoryBudget, Runtime};
use crate::ObjectId;

pub use driver::size_limit;

#[derive(Clone, Debug, PartialEq)]
pub struct RangeQuery {
    pub payload: Payload,
    pub radius: f64,
}

impl RangeQuery {
    pub fn new(payload: Payload, radius: f64) -> Self {
        Self { payload, radius }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KnnQuery {
    pub payload: Payload,
    pub k: usize,
}

impl KnnQuery {
    pub fn new(payload: Payload, k: usize) -> Self {
        Self { payload, k }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Neighbor {
    pub id: ObjectId,
    pub distance: f64,
}

impl Neighbor {
    pub fn new(id: ObjectId, distance: f64) -> Self {
        Self { id, distance }
    }

    /// Ascending `(distance, id)`.
    pub fn order(a: &Self, b: &Self) -> std::cmp::Ordering {
        a.distance.total_cmp(&b.distance).then(a.id.cmp(&b.id))
    }
}

/// One row of the intermediate result table: `node` still has to be searched
/// for `query`. `value` is the radius for range search and the distance from
/// the query to the node's pivot for kNN search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidateEntry {
    pub node: u32,
    pub query: u32,
    pub value: f64,
}

/// A run of whole queries (or a single oversized query) processed together.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryGroup {
    /// Row range in the candidate table.
    pub rows: Range<usize>,
    /// Query ids covered, first to last (inclusive).
    pub first_query: u32,
    pub last_query: u32,
}

impl QueryGroup {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Current distance to the k-th nearest neighbour found so far.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct KnnBound(pub f64);

impl KnnBound {
    pub const UNBOUNDED: KnnBound = KnnBound(f64::INFINITY);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

/// Per-query work counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QueryStats {
    /// Leaf entries whose true distance was computed.
    pub verified: usize,
    /// Child nodes discarded by pivot bounds.
    pub pruned_nodes: usize,
}

/// What the scheduler saw at one level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelTrace {
    pub layer: usize,
    pub split_rounds: usize,
    pub node_capacity: usize,
    /// Budget units free when the level started.
    pub available: usize,
    pub size_limit: usize,
    pub rows: usize,
    pub groups: usize,
    /// Largest expansion of any one group at this level.
    pub max_expanded: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// When false every node is visited and every leaf entry verified.
    pub pruning: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { pruning: true }
    }
}

#[derive(Clone, Debug, Default)]
pub struct BatchResult {
    /// Per query, ascending `(distance, id)`.
    pub answers: Vec<Vec<Neighbor>>,
    pub stats: Vec<QueryStats>,
    pub trace: Vec<LevelTrace>,
    /// kNN only: the bound after each level, per query.
    pub bounds: Vec<Vec<f64>>,
    pub peak_units: usize,
}

impl BatchResult {
    fn empty(queries: usize) -> Self {
        Self {
            answers: vec![Vec::new(); queries],
            stats: vec![QueryStats::default(); queries],
            ..Self::default()
        }
    }
}

/// Lemma-1 object test: `|d(o,p) − d(q,p)| > r` proves `d(o,q) > r`.
pub fn object_prunable(d_op: f64, d_qp: f64, r: f64) -> bool {
    (d_op - d_qp).abs() > r
}

/// A node whose parent-pivot distances lie in `[min_dis, max_dis]` holds no
/// object within `r` of the query when the query ball misses that interval.
pub fn node_prunable_range(node: &TreeNode, d_qp: f64, r: f64) -> bool {
    d_qp + r < node.min_dis || d_qp - r > node.max_dis
}

/// Node form of `|d(o,p) − d(q,p)| ≥ d(q, k_cur)`: no object of the node can
/// be strictly closer than the current k-th neighbour.
pub fn node_prunable_knn(node: &TreeNode, d_qp: f64, bound: KnnBound) -> bool {
    if !bound.is_finite() {
        return false;
    }
    d_qp + bound.0 <= node.min_dis || d_qp - bound.0 >= node.max_dis
}

/// The k-th smallest of `sorted` (ascending), or unbounded with fewer than k.
pub fn current_kth_bound(sorted: &[f64], k: usize) -> KnnBound {
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    match k.checked_sub(1).and_then(|i| sorted.get(i)) {
        Some(&d) => KnnBound(d),
        None => KnnBound::UNBOUNDED,
    }
}

/// Greedy first-fit grouping of query-contiguous rows, in query order.
///
/// A group takes whole queries while its row count stays within `size_limit`;
/// a query that alone exceeds the limit forms a group by itself.
pub fn compute_query_groups(entries: &[CandidateEntry], size_limit: usize) -> Vec<QueryGroup> {
    let size_limit = size_limit.max(1);
    let mut groups: Vec<QueryGroup> = Vec::new();
    let mut start = 0;
    while start < entries.len() {
        let query = entries[start].query;
        let mut end = start + 1;
        while end < entries.len() && entries[end].query == query {
            end += 1;
        }
        match groups.last_mut() {
            Some(g) if g.len() + (end - start) <= size_limit && g.rows.end == start => {
                g.rows.end = end;
                g.last_query = query;
            }
            _ => groups.push(QueryGroup {
                rows: start..end,
                first_query: query,
                last_query: query,
            }),
        }
        start = end;
    }
    groups
}

/// Batch search over one index.
pub struct Searcher<'a> {
    index: &'a GtsIndex,
    runtime: &'a Runtime,
    options: SearchOptions,
}

impl<'a> Searcher<'a> {
    pub fn new(index: &'a GtsIndex, runtime: &'a Runtime) -> Self {
        Self {
            index,
            runtime,
            options: SearchOptions::default(),
        }
    }

    pub fn with_options(mut self, options: SearchOptions) -> Self {
        self.options = options;
        self
    }

    /// Every object within each query's radius.
    pub fn range(&self, queries: &[RangeQuery], budget: &mut MemoryBudget) -> Result<BatchResult> {
        range::run(self.index, self.runtime, self.options, queries, budget)
    }

    /// The `min(k, n)` nearest objects for each query.
    pub fn knn(&self, queries: &[KnnQuery], budget: &mut MemoryBudget) -> Result<BatchResult> {
        knn::run(self.index, self.runtime, self.options, queries, budget)
    }
}

pub fn batch_range_query(
    index: &GtsIndex,
    queries: &[RangeQuery],
    budget: &mut MemoryBudget,
    runtime: &Runtime,
) -> Result<BatchResult> {
    Searcher::new(index, runtime).range(queries, budget)
}

pub fn batch_knn_query(
    index: &GtsIndex,
    queries: &[KnnQuery],
    budget: &mut MemoryBudget,
    runtime: &Runtime,
) -> Result<BatchResult> {
    Searcher::new(index, runtime).knn(queries, budget)
}

/// Merges `extra` into the ascending, id-distinct list `best`, keeping the
/// `k` smallest by `(distance, id)`.
pub(crate) fn merge_best(best: &mut Vec<Neighbor>, mut extra: Vec<Neighbor>, k: usize) {
    if extra.is_empty() {
        return;
    }
    extra.sort_by(Neighbor::order);
    let mut merged = Vec::with_capacity((best.len() + extra.len()).min(k));
    let (mut i, mut j) = (0, 0);
    while merged.len() < k && (i < best.len() || j < extra.len()) {
        let take_best = match (best.get(i), extra.get(j)) {
            (Some(a), Some(b)) => Neighbor::order(a, b).is_le(),
            (Some(_), None) => true,
            _ => false,
        };
        let next = if take_best {
            i += 1;
            best[i - 1]
        } else {
            j += 1;
            extra[j - 1]
        };
        // Equal ids have equal distances, so duplicates arrive adjacent.
        if merged.last().is_none_or(|last: &Neighbor| last.id != next.id) {
            merged.push(next);
        }
    }
    *best = merged;
}
