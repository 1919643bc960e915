//! The flattened pivot tree.
//!
//! Nodes live in one array in level order and are addressed arithmetically
//! (the `j`-th child of node `i` is `(i − 1)·Nc + j + 1`). Objects live in one
//! table; every node owns the contiguous segment `[pos, pos + size)`, and the
//! segments of any one level tile the table in node order. Only the leaf
//! level's table is kept.
//!
//! Construction is top-down and level-synchronous: all nodes of a level pick
//! pivots and map their objects at once, then a single global sort over
//! encoded keys (`distance / (max + 1) + node ordinal`) partitions every node
//! of the level into its children.

mod layout;
mod snapshot;

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::Dataset;
use crate::runtime::{Runtime, SortRow, *};
use crate::ObjectId;

pub use layout::{
    child_node_id, decode_distance, decode_with_ordinal, encode_distance, level_ids, node_count,
    parent_node_id, tree_height,
};
pub use snapshot::{read_snapshot, write_snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

/// Sentinel for a node without objects, hence without a pivot.
pub const NO_PIVOT: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IndexConfig {
    pub node_capacity: usize,
    pub seed: u64,
    pub store_leaf_only: bool,
}

impl IndexConfig {
    pub fn new(node_capacity: usize, seed: u64) -> Self {
        Self {
            node_capacity,
            seed,
            store_leaf_only: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.node_capacity < 2 {
            return Err(Error::Config(format!(
                "node capacity must be at least 2, got {}",
                self.node_capacity
            )));
        }
        if !self.store_leaf_only {
            return Err(Error::Config(
                "only leaf-level table storage is supported".to_string(),
            ));
        }
        Ok(())
    }
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self::new(20, 0)
    }
}

/// One node of the flattened tree.
///
/// `min_dis`/`max_dis` bound the distances from the *parent's* pivot to the
/// objects of this node; they are what the parent uses to prune this node.
/// The root has no parent; its bounds cover the distances to its own pivot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeNode {
    /// Dataset slot of the pivot, or [`NO_PIVOT`].
    pub pivot: u32,
    pub min_dis: f64,
    pub max_dis: f64,
    pub pos: usize,
    pub size: usize,
}

impl TreeNode {
    fn empty(pos: usize) -> Self {
        Self {
            pivot: NO_PIVOT,
            min_dis: 0.0,
            max_dis: 0.0,
            pos,
            size: 0,
        }
    }

    pub fn segment(&self) -> Range<usize> {
        self.pos..self.pos + self.size
    }

    pub fn has_pivot(&self) -> bool {
        self.pivot != NO_PIVOT
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeList {
    nodes: Vec<TreeNode>,
    node_capacity: usize,
    levels: usize,
    split_rounds: usize,
    max_height: usize,
}

impl NodeList {
    fn new(n: usize, nc: usize) -> Self {
        let (max_height, split_rounds) = tree_height(n, nc);
        let levels = if n == 0 { 0 } else { split_rounds + 1 };
        let nodes = (0..node_count(levels, nc)).map(|_| TreeNode::empty(0)).collect();
        Self {
            nodes,
            node_capacity: nc,
            levels,
            split_rounds,
            max_height,
        }
    }

    /// Node by 1-based id.
    pub fn get(&self, id: usize) -> &TreeNode {
        &self.nodes[id - 1]
    }

    fn get_mut(&mut self, id: usize) -> &mut TreeNode {
        &mut self.nodes[id - 1]
    }

    pub fn as_slice(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_capacity(&self) -> usize {
        self.node_capacity
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn split_rounds(&self) -> usize {
        self.split_rounds
    }

    pub fn max_height(&self) -> usize {
        self.max_height
    }

    pub fn level(&self, level: usize) -> Range<usize> {
        level_ids(level, self.node_capacity)
    }

    pub fn leaves(&self) -> Range<usize> {
        if self.levels == 0 {
            return 1..1;
        }
        self.level(self.levels)
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        self.leaves().contains(&id)
    }

    pub fn children(&self, id: usize) -> Range<usize> {
        let first = (id - 1) * self.node_capacity + 2;
        first..first + self.node_capacity
    }

    /// Level (1-based) of node `id`.
    pub fn level_of(&self, id: usize) -> usize {
        (1..=self.levels)
            .find(|&l| self.level(l).contains(&id))
            .expect("node id within tree")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableEntry {
    /// Dataset slot of the object.
    pub slot: u32,
    /// Distance to the owning node's pivot.
    pub dis: f64,
    pub tombstone: bool,
}

/// An immutable (apart from tombstones) index over a dataset.
#[derive(Clone, Debug)]
pub struct GtsIndex {
    config: IndexConfig,
    dataset: Dataset,
    nodes: NodeList,
    table: Vec<TableEntry>,
    position_of: Vec<u32>,
}

impl PartialEq for GtsIndex {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.dataset == other.dataset
            && self.nodes == other.nodes
            && self.table == other.table
    }
}

impl GtsIndex {
    /// Builds the index. An empty dataset gives an empty index.
    pub fn build(dataset: Dataset, config: IndexConfig, runtime: &Runtime) -> Result<Self> {
        let mut builder = IndexBuilder::new(dataset, config, runtime)?;
        let rounds = builder.nodes.split_rounds;
        if builder.nodes.levels > 0 {
            for layer in 1..=rounds {
                builder.map_level(layer)?;
                builder.partition_level(layer)?;
            }
            builder.map_level(rounds + 1)?;
            builder.sort_leaf_segments();
        }
        Ok(builder.finish())
    }

    pub(crate) fn from_parts(
        config: IndexConfig,
        dataset: Dataset,
        nodes: NodeList,
        table: Vec<TableEntry>,
    ) -> Self {
        let mut position_of = vec![0u32; table.len()];
        for (pos, e) in table.iter().enumerate() {
            position_of[e.slot as usize] = pos as u32;
        }
        Self {
            config,
            dataset,
            nodes,
            table,
            position_of,
        }
    }

    pub fn config(&self) -> &IndexConfig {
        &self.config
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn nodes(&self) -> &NodeList {
        &self.nodes
    }

    pub fn table(&self) -> &[TableEntry] {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn node_capacity(&self) -> usize {
        self.config.node_capacity
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        self.nodes.get(id)
    }

    pub fn segment(&self, id: usize) -> &[TableEntry] {
        &self.table[self.nodes.get(id).segment()]
    }

    pub fn object_id(&self, slot: u32) -> ObjectId {
        self.dataset.id_of(slot)
    }

    pub fn pivot_id(&self, node: usize) -> Option<ObjectId> {
        let n = self.nodes.get(node);
        n.has_pivot().then(|| self.dataset.id_of(n.pivot))
    }

    /// Pivot ids of the strict ancestors of `node`, root first.
    pub fn ancestor_pivots(&self, node: usize) -> Vec<ObjectId> {
        let nc = self.config.node_capacity;
        let mut chain = Vec::new();
        let mut cur = parent_node_id(node, nc);
        while let Some(id) = cur {
            chain.extend(self.pivot_id(id));
            cur = parent_node_id(id, nc);
        }
        chain.reverse();
        chain
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.dataset.slot_of(id).is_some()
    }

    pub fn is_tombstoned(&self, id: ObjectId) -> Option<bool> {
        self.dataset
            .slot_of(id)
            .map(|slot| self.table[self.position_of[slot] as usize].tombstone)
    }

    pub(crate) fn slot_tombstoned(&self, slot: u32) -> bool {
        self.table[self.position_of[slot as usize] as usize].tombstone
    }

    pub fn tombstone_count(&self) -> usize {
        self.table.iter().filter(|e| e.tombstone).count()
    }

    /// Sets or clears the tombstone of an indexed object. Returns the
    /// previous flag, or `None` if `id` is not indexed.
    pub fn set_tombstone(&mut self, id: ObjectId, value: bool) -> Option<bool> {
        let slot = self.dataset.slot_of(id)?;
        let entry = &mut self.table[self.position_of[slot] as usize];
        Some(std::mem::replace(&mut entry.tombstone, value))
    }

    /// Indexed objects that are not tombstoned, in id order.
    pub fn live_objects(&self) -> impl Iterator<Item = &crate::metric::DataObject> + '_ {
        self.dataset
            .objects()
            .iter()
            .enumerate()
            .filter(|(slot, _)| !self.table[self.position_of[*slot] as usize].tombstone)
            .map(|(_, o)| o)
    }

    pub fn snapshot_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        write_snapshot(self, &mut buf).expect("writing to memory");
        buf
    }
}

/// Picks a pivot among `members`.
///
/// With no ancestor pivots (the root) the pick is uniform under `rng`.
/// Otherwise it is the member farthest from its closest ancestor pivot, ties
/// going to the smallest id.
pub fn select_pivot_fft<R: Rng>(
    dataset: &Dataset,
    members: &[ObjectId],
    ancestor_pivots: &[ObjectId],
    rng: &mut R,
) -> Result<ObjectId> {
    if members.is_empty() {
        return Err(Error::EmptyNode);
    }
    if ancestor_pivots.is_empty() {
        return Ok(members[rng.random_range(0..members.len())]);
    }
    let metric = dataset.metric();
    let payload = |id: ObjectId| -> Result<&crate::metric::Payload> {
        dataset
            .slot_of(id)
            .map(|s| &dataset.get(s).payload)
            .ok_or(Error::NotFound(id))
    };
    let mut best: Option<(f64, ObjectId)> = None;
    for &m in members {
        let pm = payload(m)?;
        let mut closest = f64::INFINITY;
        for &a in ancestor_pivots {
            closest = closest.min(metric.distance(pm, payload(a)?)?);
        }
        let better = match best {
            None => true,
            Some((d, id)) => closest > d || (closest == d && m < id),
        };
        if better {
            best = Some((closest, m));
        }
    }
    Ok(best.expect("non-empty").1)
}

/// Level-by-level construction state. [`GtsIndex::build`] drives it; the
/// steps are public so each can be exercised on its own.
pub struct IndexBuilder<'rt> {
    runtime: &'rt Runtime,
    config: IndexConfig,
    dataset: Dataset,
    nodes: NodeList,
    table: Vec<TableEntry>,
    /// Per table position: distance to the closest pivot among the owning
    /// node's ancestors. Moves with its entry through every sort.
    nearest_ancestor: Vec<f64>,
    rng: ChaCha8Rng,
}

impl<'rt> IndexBuilder<'rt> {
    pub fn new(dataset: Dataset, config: IndexConfig, runtime: &'rt Runtime) -> Result<Self> {
        config.validate()?;
        let n = dataset.len();
        if n > NO_PIVOT as usize {
            return Err(Error::Config(format!("{n} objects exceed the slot range")));
        }
        let mut nodes = NodeList::new(n, config.node_capacity);
        if n > 0 {
            let root = nodes.get_mut(1);
            root.pos = 0;
            root.size = n;
        }
        let table = (0..n as u32)
            .map(|slot| TableEntry {
                slot,
                dis: 0.0,
                tombstone: false,
            })
            .collect();
        Ok(Self {
            runtime,
            config,
            dataset,
            nodes,
            table,
            nearest_ancestor: vec![f64::INFINITY; n],
            rng: ChaCha8Rng::seed_from_u64(config.seed),
        })
    }

    pub fn nodes(&self) -> &NodeList {
        &self.nodes
    }

    pub fn table(&self) -> &[TableEntry] {
        &self.table
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    /// Chooses a pivot for every node of `level` and sets each entry's `dis`
    /// to its distance from that pivot. Nodes are processed in parallel, and
    /// the entries of each node in parallel within it.
    pub fn map_level(&mut self, level: usize) -> Result<()> {
        let ids = self.nodes.level(level);

        let root_pick = if level == 1 && self.nodes.get(1).size > 0 {
            let members: Vec<ObjectId> = self.dataset.objects().iter().map(|o| o.id).collect();
            let id = select_pivot_fft(&self.dataset, &members, &[], &mut self.rng)?;
            Some(self.dataset.slot_of(id).expect("member") as u32)
        } else {
            None
        };

        // Split the table into the disjoint segments of this level's nodes.
        let mut segments: Vec<(usize, &mut [TableEntry], &mut [f64])> = Vec::with_capacity(ids.len());
        {
            let mut rest_table: &mut [TableEntry] = &mut self.table;
            let mut rest_anc: &mut [f64] = &mut self.nearest_ancestor;
            let mut offset = 0;
            for id in ids.clone() {
                let node = self.nodes.get(id);
                debug_assert_eq!(node.pos, offset, "level segments tile the table");
                let (seg, tail) = std::mem::take(&mut rest_table).split_at_mut(node.size);
                let (anc, anc_tail) = std::mem::take(&mut rest_anc).split_at_mut(node.size);
                rest_table = tail;
                rest_anc = anc_tail;
                offset += node.size;
                segments.push((id, seg, anc));
            }
        }

        let dataset = &self.dataset;
        let pivots: Vec<(usize, u32, f64, f64)> = self.runtime.install(|| {
            segments
                .into_par_iter()
                .map(|(id, seg, anc)| {
                    if seg.is_empty() {
                        return (id, NO_PIVOT, 0.0, 0.0);
                    }
                    let pivot = root_pick.unwrap_or_else(|| farthest_first(seg, anc));
                    let pivot_payload = dataset.payload(pivot).clone();
                    let metric = dataset.metric();
                    seg.par_iter_mut().zip(anc.par_iter_mut()).for_each(|(e, a)| {
                        e.dis = metric.eval(dataset.payload(e.slot), &pivot_payload);
                        *a = a.min(e.dis);
                    });
                    let (lo, hi) = seg
                        .iter()
                        .fold((f64::INFINITY, 0.0f64), |(lo, hi), e| (lo.min(e.dis), hi.max(e.dis)));
                    (id, pivot, lo, hi)
                })
                .collect()
        });

        for (id, pivot, lo, hi) in pivots {
            let node = self.nodes.get_mut(id);
            node.pivot = pivot;
            if id == 1 {
                node.min_dis = if node.size > 0 { lo } else { 0.0 };
                node.max_dis = hi;
            }
        }
        Ok(())
    }

    /// Splits every node of `level` into `Nc` children by one global sort of
    /// encoded distances. Requires [`map_level`](Self::map_level) first.
    pub fn partition_level(&mut self, level: usize) -> Result<()> {
        let nc = self.config.node_capacity;
        let ids = self.nodes.level(level);
        let first_id = ids.start;
        let n = self.table.len();
        if n == 0 {
            return Ok(());
        }

        let dis: Vec<f64> = self.table.iter().map(|e| e.dis).collect();
        let level_max = self.runtime.parallel_max(&dis)?;

        let mut ordinal_of = vec![0u32; n];
        for id in ids.clone() {
            let node = self.nodes.get(id);
            ordinal_of[node.segment()].fill((id - first_id) as u32);
        }

        let table = &self.table;
        let anc = &self.nearest_ancestor;
        let mut rows: Vec<SortRow<(TableEntry, f64, u32)>> = self.runtime.install(|| {
            (0..n)
                .into_par_iter()
                .map(|p| {
                    let e = table[p];
                    let ordinal = ordinal_of[p];
                    let key = encode_distance(e.dis, ordinal as usize, level_max)
                        .expect("distance within level maximum");
                    SortRow::new(key, e.slot as u64, (e, anc[p], ordinal))
                })
                .collect()
        });
        self.runtime.parallel_sort_by_key(&mut rows)?;
        // A fraction within one ulp of 1 can round the key onto the next
        // ordinal when level_max is huge; regroup stably if that happened.
        if rows.windows(2).any(|w| w[0].payload.2 > w[1].payload.2) {
            rows.sort_by_key(|r| r.payload.2);
        }

        for (p, row) in rows.into_iter().enumerate() {
            let (entry, nearest, ordinal) = row.payload;
            ordinal_of[p] = ordinal;
            let decoded = decode_with_ordinal(row.key, ordinal as usize, level_max);
            debug_assert!((decoded - entry.dis).abs() <= 1e-9 * (1.0 + level_max));
            // Keep the exact distance; the decoded one only carries rounding.
            self.table[p] = entry;
            self.nearest_ancestor[p] = nearest;
        }
        debug_assert!(ordinal_of.windows(2).all(|w| w[0] <= w[1]));

        // Keys that collide after rounding fall back to slot order; restore
        // exact (dis, slot) order inside each node.
        self.resort_segments(ids.clone());

        for id in ids {
            let parent = *self.nodes.get(id);
            let avg = parent.size / nc;
            for j in 1..=nc {
                let child_id = child_node_id(id, j, nc)?;
                let pos = parent.pos + (j - 1) * avg;
                let size = if j < nc {
                    avg
                } else {
                    parent.size - avg * (nc - 1)
                };
                let (min_dis, max_dis) = if size > 0 {
                    (self.table[pos].dis, self.table[pos + size - 1].dis)
                } else {
                    (0.0, 0.0)
                };
                *self.nodes.get_mut(child_id) = TreeNode {
                    pivot: NO_PIVOT,
                    min_dis,
                    max_dis,
                    pos,
                    size,
                };
            }
        }
        Ok(())
    }

    fn resort_segments(&mut self, ids: Range<usize>) {
        let mut segments: Vec<(&mut [TableEntry], &mut [f64])> = Vec::with_capacity(ids.len());
        let mut rest_table: &mut [TableEntry] = &mut self.table;
        let mut rest_anc: &mut [f64] = &mut self.nearest_ancestor;
        for id in ids {
            let size = self.nodes.get(id).size;
            let (seg, tail) = std::mem::take(&mut rest_table).split_at_mut(size);
            let (anc, anc_tail) = std::mem::take(&mut rest_anc).split_at_mut(size);
            rest_table = tail;
            rest_anc = anc_tail;
            segments.push((seg, anc));
        }
        self.runtime.install(|| {
            segments.into_par_iter().for_each(|(seg, anc)| {
                let ordered = seg
                    .windows(2)
                    .all(|w| entry_order(&w[0], &w[1]) != std::cmp::Ordering::Greater);
                if !ordered {
                    let mut paired: Vec<(TableEntry, f64)> =
                        seg.iter().copied().zip(anc.iter().copied()).collect();
                    paired.sort_by(|a, b| entry_order(&a.0, &b.0));
                    for (k, (e, a)) in paired.into_iter().enumerate() {
                        seg[k] = e;
                        anc[k] = a;
                    }
                }
            })
        });
    }

    /// Orders every leaf segment by distance to the leaf's own pivot.
    pub fn sort_leaf_segments(&mut self) {
        let leaves = self.nodes.leaves();
        self.resort_segments(leaves);
    }

    pub fn finish(self) -> GtsIndex {
        GtsIndex::from_parts(self.config, self.dataset, self.nodes, self.table)
    }
}

fn entry_order(a: &TableEntry, b: &TableEntry) -> std::cmp::Ordering {
    a.dis.total_cmp(&b.dis).then(a.slot.cmp(&b.slot))
}

/// Farthest-first pick over a segment using the cached nearest-ancestor
/// distances; ties go to the smallest slot (which is the smallest id).
fn farthest_first(seg: &[TableEntry], nearest_ancestor: &[f64]) -> u32 {
    let mut best = (f64::NEG_INFINITY, u32::MAX);
    for (e, &d) in seg.iter().zip(nearest_ancestor) {
        if d > best.0 || (d == best.0 && e.slot < best.1) {
            best = (d, e.slot);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{MetricKind, Payload};

    fn line(points: &[f64]) -> Dataset {
        Dataset::from_payloads(
            MetricKind::L1Norm,
            points.iter().map(|&x| Payload::Vector(vec![x])).collect(),
        )
        .unwrap()
    }

    fn rt() -> Runtime {
        Runtime::with_workers(2).unwrap()
    }

    #[test]
    fn fft_picks_farthest_from_ancestors() {
        let ds = line(&[0.0, 1.0, 10.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pick = select_pivot_fft(&ds, &[0, 1, 2], &[0], &mut rng).unwrap();
        assert_eq!(pick, 2);
        assert_eq!(select_pivot_fft(&ds, &[1], &[0], &mut rng).unwrap(), 1);
        assert!(matches!(
            select_pivot_fft(&ds, &[], &[0], &mut rng),
            Err(Error::EmptyNode)
        ));
        // equidistant members: smallest id wins
        let ds = line(&[0.0, -3.0, 3.0]);
        assert_eq!(select_pivot_fft(&ds, &[2, 1], &[0], &mut rng).unwrap(), 1);
    }

    #[test]
    fn root_pivot_is_seed_deterministic() {
        let ds = line(&(0..50).map(f64::from).collect::<Vec<_>>());
        let a = GtsIndex::build(ds.clone(), IndexConfig::new(3, 42), &rt()).unwrap();
        let b = GtsIndex::build(ds, IndexConfig::new(3, 42), &rt()).unwrap();
        assert_eq!(a.pivot_id(1), b.pivot_id(1));
    }

    #[test]
    fn single_object_node_maps_to_zero() {
        let ds = line(&[5.0]);
        let idx = GtsIndex::build(ds, IndexConfig::new(2, 1), &rt()).unwrap();
        assert_eq!(idx.nodes().len(), 1);
        assert_eq!(idx.table()[0].dis, 0.0);
        assert_eq!(idx.pivot_id(1), Some(0));
    }

    #[test]
    fn partition_sizes_follow_floor_and_remainder() {
        let ds = line(&(0..10).map(f64::from).collect::<Vec<_>>());
        let rt = rt();
        let mut b = IndexBuilder::new(ds, IndexConfig::new(3, 5), &rt).unwrap();
        // n=10, Nc=3 has max height 2 and a single split round
        assert_eq!(b.nodes().split_rounds(), 1);
        b.map_level(1).unwrap();
        b.partition_level(1).unwrap();
        let sizes: Vec<usize> = (2..5).map(|id| b.nodes().get(id).size).collect();
        assert_eq!(sizes, vec![3, 3, 4]);
        let positions: Vec<usize> = (2..5).map(|id| b.nodes().get(id).pos).collect();
        assert_eq!(positions, vec![0, 3, 6]);
    }

    #[test]
    fn map_level_distances_match_recomputation() {
        let pts: Vec<f64> = (0..40).map(|i| ((i * 37) % 41) as f64 * 0.5).collect();
        let ds = line(&pts);
        let rt = rt();
        let mut b = IndexBuilder::new(ds.clone(), IndexConfig::new(2, 9), &rt).unwrap();
        b.map_level(1).unwrap();
        let pivot = b.nodes().get(1).pivot;
        for e in b.table() {
            let expected = MetricKind::L1Norm
                .distance(&ds.get(e.slot as usize).payload, &ds.get(pivot as usize).payload)
                .unwrap();
            assert_eq!(e.dis, expected);
        }
    }

    #[test]
    fn empty_dataset_builds_empty_index() {
        let idx = GtsIndex::build(Dataset::empty(MetricKind::L2Norm), IndexConfig::default(), &rt())
            .unwrap();
        assert!(idx.is_empty());
        assert!(idx.nodes().is_empty());
    }

    #[test]
    fn rejects_small_capacity() {
        let err = GtsIndex::build(line(&[1.0]), IndexConfig::new(1, 0), &rt());
        assert!(matches!(err, Err(Error::Config(_))));
    }
}
