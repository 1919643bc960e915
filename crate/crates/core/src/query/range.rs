use crate::error::{Error, Result};
use crate::index::{GtsIndex, TableEntry};
use crate::runtime::{MemoryBudget, Runtime, *};

use super::driver::{self, LevelSearch};
use super::{
    node_prunable_range, BatchResult, CandidateEntry, Neighbor, QueryStats, RangeQuery,
    SearchOptions,
};

struct RangeSearch<'a> {
    index: &'a GtsIndex,
    runtime: &'a Runtime,
    queries: &'a [RangeQuery],
    pruning: bool,
    answers: Vec<Vec<Neighbor>>,
    stats: Vec<QueryStats>,
}

impl LevelSearch for RangeSearch<'_> {
    fn expand(&mut self, rows: &[CandidateEntry]) -> Result<Vec<CandidateEntry>> {
        let (index, queries, pruning) = (self.index, self.queries, self.pruning);
        let ds = index.dataset();
        let nodes = index.nodes();
        let per_row: Vec<(Vec<CandidateEntry>, usize)> = self.runtime.install(|| {
            rows.par_iter()
                .map(|row| {
                    let node = nodes.get(row.node as usize);
                    let q = &queries[row.query as usize];
                    let d_qp = ds.metric().eval(&q.payload, ds.payload(node.pivot));
                    let mut kept = Vec::new();
                    let mut pruned = 0;
                    for child in nodes.children(row.node as usize) {
                        let c = nodes.get(child);
                        if c.size == 0 {
                            continue;
                        }
                        if pruning && node_prunable_range(c, d_qp, q.radius) {
                            pruned += 1;
                        } else {
                            kept.push(CandidateEntry {
                                node: child as u32,
                                query: row.query,
                                value: q.radius,
                            });
                        }
                    }
                    (kept, pruned)
                })
                .collect()
        });
        let mut out = Vec::new();
        for (row, (kept, pruned)) in rows.iter().zip(per_row) {
            self.stats[row.query as usize].pruned_nodes += pruned;
            out.extend(kept);
        }
        Ok(out)
    }

    fn verify(&mut self, rows: &[CandidateEntry]) {
        let (index, queries, pruning) = (self.index, self.queries, self.pruning);
        let ds = index.dataset();
        let metric = ds.metric();
        let per_row: Vec<(Vec<Neighbor>, usize)> = self.runtime.install(|| {
            rows.par_iter()
                .map(|row| {
                    let leaf = index.node(row.node as usize);
                    let q = &queries[row.query as usize];
                    let seg = index.segment(row.node as usize);
                    let window = if pruning {
                        let d_ql = metric.eval(&q.payload, ds.payload(leaf.pivot));
                        leaf_window(seg, d_ql - q.radius, d_ql + q.radius)
                    } else {
                        seg
                    };
                    let mut hits = Vec::new();
                    let mut verified = 0;
                    for e in window.iter().filter(|e| !e.tombstone) {
                        let d = metric.eval(&q.payload, ds.payload(e.slot));
                        verified += 1;
                        if d <= q.radius {
                            hits.push(Neighbor::new(ds.id_of(e.slot), d));
                        }
                    }
                    (hits, verified)
                })
                .collect()
        });
        for (row, (hits, verified)) in rows.iter().zip(per_row) {
            let q = row.query as usize;
            self.stats[q].verified += verified;
            self.answers[q].extend(hits);
        }
    }
}

/// Entries whose pivot distance lies in `[lo, hi]`; the segment is sorted.
fn leaf_window(seg: &[TableEntry], lo: f64, hi: f64) -> &[TableEntry] {
    let start = seg.partition_point(|e| e.dis < lo);
    let end = seg.partition_point(|e| e.dis <= hi);
    &seg[start..end.max(start)]
}

pub(super) fn run(
    index: &GtsIndex,
    runtime: &Runtime,
    options: SearchOptions,
    queries: &[RangeQuery],
    budget: &mut MemoryBudget,
) -> Result<BatchResult> {
    for q in queries {
        index.dataset().check_query(&q.payload)?;
        if q.radius.is_nan() || q.radius < 0.0 {
            return Err(Error::UndefinedRadius(q.radius));
        }
    }
    let mut result = BatchResult::empty(queries.len());
    if index.is_empty() {
        return Ok(result);
    }
    let roots = (0..queries.len())
        .map(|q| CandidateEntry {
            node: 1,
            query: q as u32,
            value: queries[q].radius,
        })
        .collect();
    let mut search = RangeSearch {
        index,
        runtime,
        queries,
        pruning: options.pruning,
        answers: vec![Vec::new(); queries.len()],
        stats: vec![QueryStats::default(); queries.len()],
    };
    result.trace = driver::run(index, budget, &mut search, roots)?;
    for answer in &mut search.answers {
        answer.sort_by(Neighbor::order);
    }
    result.answers = search.answers;
    result.stats = search.stats;
    result.peak_units = budget.peak();
    Ok(result)
}
