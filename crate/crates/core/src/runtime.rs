//! Data-parallel execution and memory-unit accounting.
//!
//! With the `parallel` feature (default) loops run on a rayon pool sized by
//! [`ParallelismConfig::workers`]. Without it every loop runs sequentially
//! through the [`seq`] shim, which mirrors the subset of rayon's iterator API
//! the crate uses. Results never depend on the worker count: every parallel
//! loop is write-disjoint and every sort is over a total order.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};

#[cfg(feature = "parallel")]
pub(crate) use rayon::prelude::*;
#[cfg(not(feature = "parallel"))]
pub(crate) use self::seq::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ParallelismConfig {
    pub workers: usize,
    /// Modeled compute width, used only by the cost model.
    pub concurrency_capacity: usize,
}

impl ParallelismConfig {
    pub fn with_workers(workers: usize) -> Self {
        Self {
            workers,
            ..Self::default()
        }
    }
}

impl Default for ParallelismConfig {
    fn default() -> Self {
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        Self {
            workers,
            concurrency_capacity: 16_384,
        }
    }
}

/// Handle on the worker pool. Cheap to share by reference.
pub struct Runtime {
    config: ParallelismConfig,
    #[cfg(feature = "parallel")]
    pool: rayon::ThreadPool,
}

impl fmt::Debug for Runtime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Runtime").field("config", &self.config).finish()
    }
}

impl Default for Runtime {
    fn default() -> Self {
        Self::new(ParallelismConfig::default()).expect("default runtime")
    }
}

impl Runtime {
    pub fn new(config: ParallelismConfig) -> Result<Self> {
        if config.workers == 0 || config.concurrency_capacity == 0 {
            return Err(Error::Config(
                "worker count and concurrency capacity must be positive".into(),
            ));
        }
        #[cfg(feature = "parallel")]
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .thread_name(|i| format!("gts-worker-{i}"))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self {
            config,
            #[cfg(feature = "parallel")]
            pool,
        })
    }

    pub fn with_workers(workers: usize) -> Result<Self> {
        Self::new(ParallelismConfig::with_workers(workers))
    }

    pub fn config(&self) -> ParallelismConfig {
        self.config
    }

    pub fn workers(&self) -> usize {
        self.config.workers
    }

    /// Runs `f` inside the pool so nested parallel iterators use its workers.
    pub fn install<R, F>(&self, f: F) -> R
    where
        R: Send,
        F: FnOnce() -> R + Send,
    {
        #[cfg(feature = "parallel")]
        {
            self.pool.install(f)
        }
        #[cfg(not(feature = "parallel"))]
        {
            f()
        }
    }

    /// Runs `body` once per index. Bodies must not depend on each other.
    pub fn parallel_for<F>(&self, range: Range<usize>, body: F)
    where
        F: Fn(usize) + Sync + Send,
    {
        self.install(|| range.into_par_iter().for_each(body));
    }

    /// `out[i] = f(i)` for every slot of `out`.
    pub fn parallel_fill<T, F>(&self, out: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.install(|| {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(i, slot)| *slot = f(i))
        });
    }

    pub fn parallel_map<T, F>(&self, range: Range<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.install(|| range.into_par_iter().map(f).collect())
    }

    /// Sorts rows ascending by `(key, tie)`. Fails on a NaN key.
    pub fn parallel_sort_by_key<P: Send>(&self, rows: &mut [SortRow<P>]) -> Result<()> {
        if let Some(bad) = rows.iter().find(|r| r.key.is_nan()) {
            return Err(Error::InvalidKey {
                key: bad.key,
                tie: bad.tie,
            });
        }
        self.install(|| rows.par_sort_by(SortRow::cmp_key));
        Ok(())
    }

    pub fn parallel_max(&self, values: &[f64]) -> Result<f64> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        let max = self.install(|| {
            values
                .par_iter()
                .copied()
                .max_by(|a, b| a.total_cmp(b))
                .expect("non-empty")
        });
        Ok(max)
    }
}

/// One row of a keyed sort; `tie` makes the order total.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SortRow<P> {
    pub key: f64,
    pub tie: u64,
    pub payload: P,
}

impl<P> SortRow<P> {
    pub fn new(key: f64, tie: u64, payload: P) -> Self {
        Self { key, tie, payload }
    }

    fn cmp_key(a: &Self, b: &Self) -> Ordering {
        a.key.total_cmp(&b.key).then(a.tie.cmp(&b.tie))
    }
}

/// Signal returned when a reservation does not fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetOverflow {
    pub requested: usize,
    pub available: usize,
}

/// Memory accounted in candidate-entry units (one unit per candidate row).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MemoryBudget {
    capacity: usize,
    in_use: usize,
    peak: usize,
}

impl MemoryBudget {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            in_use: 0,
            peak: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn in_use(&self) -> usize {
        self.in_use
    }

    pub fn peak(&self) -> usize {
        self.peak
    }

    pub fn available(&self) -> usize {
        self.capacity - self.in_use
    }

    /// On overflow the budget is left untouched.
    pub fn reserve(&mut self, units: usize) -> std::result::Result<(), BudgetOverflow> {
        if units > self.available() {
            return Err(BudgetOverflow {
                requested: units,
                available: self.available(),
            });
        }
        self.in_use += units;
        self.peak = self.peak.max(self.in_use);
        Ok(())
    }

    /// Releases at most what is in use.
    pub fn release(&mut self, units: usize) {
        debug_assert!(units <= self.in_use, "releasing more than reserved");
        self.in_use -= units.min(self.in_use);
    }

    pub fn reset_peak(&mut self) {
        self.peak = self.in_use;
    }
}

/// Sequential stand-ins for the rayon entry points used in this crate.
#[cfg_attr(feature = "parallel", allow(dead_code))]
pub(crate) mod seq {
    pub(crate) trait IntoParallelIterator {
        type Iter: Iterator;
        fn into_par_iter(self) -> Self::Iter;
    }

    impl<I: IntoIterator> IntoParallelIterator for I {
        type Iter = I::IntoIter;
        fn into_par_iter(self) -> Self::Iter {
            self.into_iter()
        }
    }

    pub(crate) trait ParallelSlice<T> {
        fn par_iter(&self) -> std::slice::Iter<'_, T>;
    }

    impl<T> ParallelSlice<T> for [T] {
        fn par_iter(&self) -> std::slice::Iter<'_, T> {
            self.iter()
        }
    }

    pub(crate) trait ParallelSliceMut<T> {
        fn par_iter_mut(&mut self) -> std::slice::IterMut<'_, T>;
        fn par_sort_by<F>(&mut self, compare: F)
        where
            F: Fn(&T, &T) -> std::cmp::Ordering;
    }

    impl<T> ParallelSliceMut<T> for [T] {
        fn par_iter_mut(&mut self) -> std::slice::IterMut<'_, T> {
            self.iter_mut()
        }
        fn par_sort_by<F>(&mut self, compare: F)
        where
            F: Fn(&T, &T) -> std::cmp::Ordering,
        {
            self.sort_by(compare)
        }
    }
}
