use crate::error::{Error, Result};
use crate::index::{encode_distance, GtsIndex};
use crate::runtime::{MemoryBudget, Runtime, SortRow, *};

use super::driver::{self, LevelSearch};
use super::{
    merge_best, node_prunable_knn, BatchResult, CandidateEntry, KnnBound,
    KnnQuery, Neighbor, QueryStats, SearchOptions,
};

#[derive(Clone, Debug, Default)]
struct KnnState {
    /// Up to k live objects seen so far, ascending `(distance, id)`.
    best: Vec<Neighbor>,
    bounds: Vec<f64>,
    stats: QueryStats,
}

impl KnnState {
    fn bound(&self, k: usize) -> KnnBound {
        KnnBound(kth(&self.best, k))
    }
}

/// A child of a candidate row together with the distances needed to judge it.
#[derive(Clone, Copy, Debug)]
struct Child {
    query: u32,
    node: u32,
    ordinal: u32,
    /// Query to the parent's pivot; the child's bounds are relative to it.
    parent_dis: f64,
    /// Query to the child's own pivot.
    dis: f64,
}

struct KnnSearch<'a> {
    index: &'a GtsIndex,
    runtime: &'a Runtime,
    queries: &'a [KnnQuery],
    pruning: bool,
    states: Vec<KnnState>,
}

impl KnnSearch<'_> {
    fn witness(&self, slot: u32, dis: f64) -> Option<Neighbor> {
        (!self.index.slot_tombstoned(slot))
            .then(|| Neighbor::new(self.index.dataset().id_of(slot), dis))
    }
}

impl LevelSearch for KnnSearch<'_> {
    fn expand(&mut self, rows: &[CandidateEntry]) -> Result<Vec<CandidateEntry>> {
        let (index, queries) = (self.index, self.queries);
        let ds = index.dataset();
        let nodes = index.nodes();

        // Ordinal of each row's query within this slice.
        let mut ordinals = Vec::with_capacity(rows.len());
        let mut ordinal = 0u32;
        for (i, row) in rows.iter().enumerate() {
            if i > 0 && row.query != rows[i - 1].query {
                ordinal += 1;
            }
            ordinals.push(ordinal);
        }

        let per_row: Vec<Vec<Child>> = self.runtime.install(|| {
            rows.par_iter()
                .zip(ordinals.par_iter())
                .map(|(row, &ordinal)| {
                    let q = &queries[row.query as usize];
                    nodes
                        .children(row.node as usize)
                        .filter(|&c| nodes.get(c).size > 0)
                        .map(|c| Child {
                            query: row.query,
                            node: c as u32,
                            ordinal,
                            parent_dis: row.value,
                            dis: ds.metric().eval(&q.payload, ds.payload(nodes.get(c).pivot)),
                        })
                        .collect()
                })
                .collect()
        });
        let children: Vec<Child> = per_row.into_iter().flatten().collect();
        if children.is_empty() {
            return Ok(Vec::new());
        }

        // One global sort puts each query's children together, nearest first.
        let dis: Vec<f64> = children.iter().map(|c| c.dis).collect();
        let level_max = self.runtime.parallel_max(&dis)?;
        let mut sorted: Vec<SortRow<Child>> = children
            .into_iter()
            .map(|c| {
                let key = encode_distance(c.dis, c.ordinal as usize, level_max)?;
                Ok(SortRow::new(key, c.node as u64, c))
            })
            .collect::<Result<_>>()?;
        self.runtime.parallel_sort_by_key(&mut sorted)?;
        if sorted.windows(2).any(|w| w[0].payload.ordinal > w[1].payload.ordinal) {
            sorted.sort_by_key(|r| r.payload.ordinal);
        }
        let sorted: Vec<Child> = sorted.into_iter().map(|r| r.payload).collect();

        let mut runs: Vec<(u32, std::ops::Range<usize>)> = Vec::new();
        for (i, c) in sorted.iter().enumerate() {
            match runs.last_mut() {
                Some((q, r)) if *q == c.query => r.end = i + 1,
                _ => runs.push((c.query, i..i + 1)),
            }
        }

        let witnesses: Vec<Vec<Neighbor>> = runs
            .iter()
            .map(|(_, r)| {
                sorted[r.clone()]
                    .iter()
                    .filter_map(|c| self.witness(nodes.get(c.node as usize).pivot, c.dis))
                    .collect()
            })
            .collect();

        let first = runs[0].0 as usize;
        let last = runs[runs.len() - 1].0 as usize;
        let mut run_of = vec![usize::MAX; last - first + 1];
        for (i, (q, _)) in runs.iter().enumerate() {
            run_of[*q as usize - first] = i;
        }

        let pruning = self.pruning;
        let sorted = &sorted;
        let runs = &runs;
        let states = &mut self.states[first..=last];
        let mut witnesses: Vec<Option<Vec<Neighbor>>> = witnesses.into_iter().map(Some).collect();
        let mut work: Vec<(&mut KnnState, usize, Option<Vec<Neighbor>>)> = states
            .iter_mut()
            .enumerate()
            .filter(|(i, _)| run_of[*i] != usize::MAX)
            .map(|(i, s)| (s, run_of[i], witnesses[run_of[i]].take()))
            .collect();
        let kept: Vec<Vec<CandidateEntry>> = self.runtime.install(|| {
            work.par_iter_mut()
                .map(|(state, run, found)| {
                    let (query, range) = &runs[*run];
                    let k = queries[*query as usize].k;
                    merge_best(&mut state.best, found.take().unwrap_or_default(), k);
                    let bound = state.bound(k);
                    state.bounds.push(bound.value());
                    let mut out = Vec::new();
                    for c in &sorted[range.clone()] {
                        let node = nodes.get(c.node as usize);
                        if pruning && node_prunable_knn(node, c.parent_dis, bound) {
                            state.stats.pruned_nodes += 1;
                        } else {
                            out.push(CandidateEntry {
                                node: c.node,
                                query: c.query,
                                value: c.dis,
                            });
                        }
                    }
                    out
                })
                .collect()
        });
        Ok(kept.into_iter().flatten().collect())
    }

    /// Each query's leaves are scanned nearest pivot first, one query per
    /// task. Inside a leaf the scan walks outward from the query's pivot
    /// distance and stops once the gap reaches the running k-th bound, so
    /// neighbours found early tighten the bound for the rest.
    fn verify(&mut self, rows: &[CandidateEntry]) {
        let (index, queries, pruning) = (self.index, self.queries, self.pruning);
        let ds = index.dataset();
        let metric = ds.metric();

        let mut runs: Vec<std::ops::Range<usize>> = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            match runs.last_mut() {
                Some(r) if rows[r.start].query == row.query => r.end = i + 1,
                _ => runs.push(i..i + 1),
            }
        }
        let seeds: Vec<Vec<Neighbor>> = runs
            .iter()
            .map(|r| self.states[rows[r.start].query as usize].best.clone())
            .collect();

        let per_query: Vec<(Vec<Neighbor>, usize)> = self.runtime.install(|| {
            runs.par_iter()
                .zip(seeds.into_par_iter())
                .map(|(run, mut best)| {
                    let q = &queries[rows[run.start].query as usize];
                    let mut verified = 0;
                    for row in &rows[run.clone()] {
                        let seg = index.segment(row.node as usize);
                        let d_ql = row.value;
                        let mut hi = seg.partition_point(|e| e.dis < d_ql);
                        let mut lo = hi;
                        loop {
                            let gap_lo = (lo > 0).then(|| d_ql - seg[lo - 1].dis);
                            let gap_hi = (hi < seg.len()).then(|| seg[hi].dis - d_ql);
                            let take_lo = match (gap_lo, gap_hi) {
                                (Some(a), Some(b)) => a <= b,
                                (Some(_), None) => true,
                                (None, Some(_)) => false,
                                (None, None) => break,
                            };
                            let (gap, pos) = if take_lo {
                                lo -= 1;
                                (d_ql - seg[lo].dis, lo)
                            } else {
                                hi += 1;
                                (seg[hi - 1].dis - d_ql, hi - 1)
                            };
                            if pruning && gap >= kth(&best, q.k) {
                                break;
                            }
                            let e = &seg[pos];
                            if e.tombstone {
                                continue;
                            }
                            let d = metric.eval(&q.payload, ds.payload(e.slot));
                            verified += 1;
                            insert_best(&mut best, Neighbor::new(ds.id_of(e.slot), d), q.k);
                        }
                    }
                    (best, verified)
                })
                .collect()
        });
        for (run, (best, verified)) in runs.iter().zip(per_query) {
            let state = &mut self.states[rows[run.start].query as usize];
            state.stats.verified += verified;
            state.best = best;
        }
    }
}

fn kth(best: &[Neighbor], k: usize) -> f64 {
    if best.len() >= k {
        best[k - 1].distance
    } else {
        f64::INFINITY
    }
}

/// Inserts into an ascending, id-distinct list capped at `k`.
fn insert_best(best: &mut Vec<Neighbor>, n: Neighbor, k: usize) {
    match best.binary_search_by(|b| Neighbor::order(b, &n)) {
        Ok(_) => {}
        Err(at) if at < k => {
            best.insert(at, n);
            best.truncate(k);
        }
        Err(_) => {}
    }
}

pub(super) fn run(
    index: &GtsIndex,
    runtime: &Runtime,
    options: SearchOptions,
    queries: &[KnnQuery],
    budget: &mut MemoryBudget,
) -> Result<BatchResult> {
    if queries.len() > u32::MAX as usize {
        return Err(Error::Config("too many queries in one batch".into()));
    }
    for q in queries {
        index.dataset().check_query(&q.payload)?;
    }
    let mut result = BatchResult::empty(queries.len());
    result.bounds = vec![Vec::new(); queries.len()];
    if index.is_empty() {
        return Ok(result);
    }
    let ds = index.dataset();
    let root_pivot = index.node(1).pivot;
    let mut search = KnnSearch {
        index,
        runtime,
        queries,
        pruning: options.pruning,
        states: vec![KnnState::default(); queries.len()],
    };
    let root_dis: Vec<f64> = runtime.parallel_map(0..queries.len(), |q| {
        ds.metric().eval(&queries[q].payload, ds.payload(root_pivot))
    });
    let mut roots = Vec::new();
    for (q, &d) in root_dis.iter().enumerate() {
        if queries[q].k == 0 {
            continue;
        }
        if let Some(w) = search.witness(root_pivot, d) {
            search.states[q].best.push(w);
        }
        roots.push(CandidateEntry {
            node: 1,
            query: q as u32,
            value: d,
        });
    }
    result.trace = driver::run(index, budget, &mut search, roots)?;
    for (q, state) in search.states.into_iter().enumerate() {
        result.answers[q] = state.best;
        result.stats[q] = state.stats;
        result.bounds[q] = state.bounds;
    }
    result.peak_units = budget.peak();
    Ok(result)
}
