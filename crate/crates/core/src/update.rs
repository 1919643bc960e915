//! Buffered updates over a built index.
//!
//! Inserts land in a bounded cache and are searched by brute force until
//! the cache overflows, at which point the index is rebuilt over the
//! logical set. Deletes of indexed objects only flag their table entry;
//! the stored distances stay valid, so pruning is unaffected.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::index::{GtsIndex, IndexConfig};
use crate::metric::{DataObject, Dataset, MetricKind, Payload};
use crate::query::{merge_best, BatchResult, KnnQuery, Neighbor, RangeQuery, Searcher};
use crate::runtime::{MemoryBudget, Runtime};
use crate::ObjectId;

pub const DEFAULT_CACHE_CAPACITY: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub struct CacheTable {
    pending: Vec<DataObject>,
    /// Ids flagged in the index and not pending again.
    tombstones: BTreeSet<ObjectId>,
    capacity: usize,
}

impl CacheTable {
    pub fn new(capacity: usize) -> Self {
        Self {
            pending: Vec::new(),
            tombstones: BTreeSet::new(),
            capacity,
        }
    }

    pub fn pending(&self) -> &[DataObject] {
        &self.pending
    }

    pub fn tombstones(&self) -> &BTreeSet<ObjectId> {
        &self.tombstones
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    fn position(&self, id: ObjectId) -> Option<usize> {
        self.pending.iter().position(|o| o.id == id)
    }

    fn clear(&mut self) {
        self.pending.clear();
        self.tombstones.clear();
    }
}

/// Single-writer owner of an index and its update cache.
pub struct UpdateEngine<'rt> {
    index: GtsIndex,
    cache: CacheTable,
    runtime: &'rt Runtime,
    rebuilds: usize,
}

impl<'rt> UpdateEngine<'rt> {
    pub fn new(index: GtsIndex, cache_capacity: usize, runtime: &'rt Runtime) -> Self {
        Self {
            index,
            cache: CacheTable::new(cache_capacity),
            runtime,
            rebuilds: 0,
        }
    }

    /// Engine over an empty index.
    pub fn empty(
        metric: MetricKind,
        config: IndexConfig,
        cache_capacity: usize,
        runtime: &'rt Runtime,
    ) -> Result<Self> {
        let index = GtsIndex::build(Dataset::empty(metric), config, runtime)?;
        Ok(Self::new(index, cache_capacity, runtime))
    }

    pub fn index(&self) -> &GtsIndex {
        &self.index
    }

    pub fn cache(&self) -> &CacheTable {
        &self.cache
    }

    pub fn rebuilds(&self) -> usize {
        self.rebuilds
    }

    pub fn metric(&self) -> MetricKind {
        self.index.dataset().metric()
    }

    fn live_in_index(&self, id: ObjectId) -> bool {
        self.index.is_tombstoned(id) == Some(false)
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.live_in_index(id) || self.cache.position(id).is_some()
    }

    /// Live objects, ascending id.
    pub fn logical_objects(&self) -> Vec<DataObject> {
        let mut all: Vec<DataObject> = self
            .index
            .live_objects()
            .cloned()
            .chain(self.cache.pending.iter().cloned())
            .collect();
        all.sort_by_key(|o| o.id);
        all
    }

    pub fn logical_ids(&self) -> Vec<ObjectId> {
        self.logical_objects().iter().map(|o| o.id).collect()
    }

    pub fn len(&self) -> usize {
        self.index.len() - self.index.tombstone_count() + self.cache.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check_payload(&self, payload: &Payload) -> Result<()> {
        self.index.dataset().check_query(payload)?;
        if let Some(first) = self.cache.pending.first() {
            self.metric().check(payload, &first.payload)?;
        }
        Ok(())
    }

    /// Buffers `object`; rebuilds once the cache holds more than its capacity.
    pub fn insert(&mut self, object: DataObject) -> Result<()> {
        if self.contains(object.id) {
            return Err(Error::DuplicateId(object.id));
        }
        self.check_payload(&object.payload)?;
        self.cache.tombstones.remove(&object.id);
        self.cache.pending.push(object);
        if self.cache.len() > self.cache.capacity {
            self.flush_rebuild()?;
        }
        Ok(())
    }

    pub fn delete(&mut self, id: ObjectId) -> Result<()> {
        if let Some(pos) = self.cache.position(id) {
            self.cache.pending.remove(pos);
            // A reinserted id may still be flagged in the index.
            if self.index.is_tombstoned(id) == Some(true) {
                self.cache.tombstones.insert(id);
            }
            return Ok(());
        }
        if !self.live_in_index(id) {
            return Err(Error::NotFound(id));
        }
        self.index.set_tombstone(id, true);
        self.cache.tombstones.insert(id);
        Ok(())
    }

    /// Rebuilds the index over the logical set and empties the cache.
    pub fn flush_rebuild(&mut self) -> Result<&GtsIndex> {
        let objects = self.logical_objects();
        self.install(objects)?;
        Ok(&self.index)
    }

    /// One rebuild over `(logical − deletes) ∪ inserts`.
    pub fn batch_update(&mut self, inserts: Vec<DataObject>, deletes: &[ObjectId]) -> Result<&GtsIndex> {
        let removed: BTreeSet<ObjectId> = deletes.iter().copied().collect();
        for &id in deletes {
            if !self.contains(id) {
                return Err(Error::NotFound(id));
            }
        }
        let mut objects: Vec<DataObject> = self
            .logical_objects()
            .into_iter()
            .filter(|o| !removed.contains(&o.id))
            .collect();
        let mut fresh = BTreeSet::new();
        for o in &inserts {
            let taken = self.contains(o.id) && !removed.contains(&o.id);
            if taken || !fresh.insert(o.id) {
                return Err(Error::DuplicateId(o.id));
            }
            self.check_payload(&o.payload)?;
        }
        objects.extend(inserts);
        objects.sort_by_key(|o| o.id);
        self.install(objects)?;
        Ok(&self.index)
    }

    fn install(&mut self, objects: Vec<DataObject>) -> Result<()> {
        let metric = self.metric();
        let dataset = if objects.is_empty() {
            Dataset::empty(metric)
        } else {
            Dataset::new(metric, objects)?
        };
        // Build fully before swapping so readers never see a partial index.
        let fresh = GtsIndex::build(dataset, *self.index.config(), self.runtime)?;
        self.index = fresh;
        self.cache.clear();
        self.rebuilds += 1;
        Ok(())
    }

    fn scan_cache(&self, payload: &Payload) -> Vec<Neighbor> {
        let metric = self.metric();
        let pending = &self.cache.pending;
        self.runtime.parallel_map(0..pending.len(), |i| {
            Neighbor::new(pending[i].id, metric.eval(payload, &pending[i].payload))
        })
    }

    /// Range search over the index and the cache, merged.
    pub fn range(&self, queries: &[RangeQuery], budget: &mut MemoryBudget) -> Result<BatchResult> {
        for q in queries {
            self.check_payload(&q.payload)?;
        }
        let mut result = Searcher::new(&self.index, self.runtime).range(queries, budget)?;
        for (i, q) in queries.iter().enumerate() {
            let hits = self.scan_cache(&q.payload);
            result.stats[i].verified += hits.len();
            let answer = &mut result.answers[i];
            answer.extend(hits.into_iter().filter(|n| n.distance <= q.radius));
            answer.sort_by(Neighbor::order);
        }
        Ok(result)
    }

    /// kNN over the index and the cache: the k best of the union.
    pub fn knn(&self, queries: &[KnnQuery], budget: &mut MemoryBudget) -> Result<BatchResult> {
        for q in queries {
            self.check_payload(&q.payload)?;
        }
        let mut result = Searcher::new(&self.index, self.runtime).knn(queries, budget)?;
        for (i, q) in queries.iter().enumerate() {
            let found = self.scan_cache(&q.payload);
            result.stats[i].verified += found.len();
            merge_best(&mut result.answers[i], found, q.k);
        }
        Ok(result)
    }
}
