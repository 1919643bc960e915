//! Pruning-probability bound and per-query cost estimate used to pick the
//! node capacity.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::Dataset;

/// Default cap on sampled pairs for [`estimate_variance`].
pub const DEFAULT_SAMPLE_PAIRS: usize = 10_000;

/// Node capacities tried by `tune` when none are given.
pub const CANDIDATE_CAPACITIES: [usize; 6] = [10, 20, 40, 80, 160, 320];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CostParams {
    pub n: usize,
    pub node_capacity: usize,
    /// Variance of pairwise distances.
    pub sigma_sq: f64,
    pub radius: f64,
    /// Modeled concurrency capacity.
    pub concurrency: usize,
}

/// Unbiased sample variance of `d(a, b)` over unordered pairs `a ≠ b`.
///
/// Uses every pair when `sample_pairs` covers them all, otherwise draws
/// `sample_pairs` pairs uniformly with replacement.
pub fn estimate_variance<R: Rng>(dataset: &Dataset, sample_pairs: usize, rng: &mut R) -> Result<f64> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, have: n });
    }
    if sample_pairs == 0 {
        return Err(Error::Config("sample_pairs must be at least 1".into()));
    }
    let metric = dataset.metric();
    let objects = dataset.objects();
    let d = |i: usize, j: usize| metric.eval(&objects[i].payload, &objects[j].payload);

    let total = n as u128 * (n as u128 - 1) / 2;
    let values: Vec<f64> = if sample_pairs as u128 >= total {
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| d(i, j)).collect()
    } else {
        (0..sample_pairs)
            .map(|_| {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                d(i, j)
            })
            .collect()
    };
    Ok(sample_variance(&values))
}

fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0)
}

/// Chebyshev lower bound on the chance an object survives `level` levels of
/// pivot filtering: `max(0, 1 − 2σ²/r²)^level`.
pub fn prune_retention_bound(sigma_sq: f64, radius: f64, level: u32) -> Result<f64> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::UndefinedRadius(radius));
    }
    if level == 0 {
        return Err(Error::Config("level must be at least 1".into()));
    }
    let base = (1.0 - 2.0 * sigma_sq / (radius * radius)).clamp(0.0, 1.0);
    Ok(base.powi(level as i32))
}

/// Levels searched: `⌈log_nc n⌉`, at least one.
pub fn search_levels(n: usize, nc: usize) -> u32 {
    let mut levels = 0u32;
    let mut reach: u128 = 1;
    while reach < n as u128 {
        reach *= nc as u128;
        levels += 1;
    }
    levels.max(1)
}

/// `Σ_i i² · max(1, ⌈Nc^i · bound(i) / C⌉) · log₂²Nc` over the search levels.
pub fn estimate_range_cost(params: &CostParams) -> Result<f64> {
    let nc = params.node_capacity;
    if nc < 2 {
        return Err(Error::Config(format!("node capacity {nc} below 2")));
    }
    if params.concurrency == 0 {
        return Err(Error::Config("concurrency capacity must be positive".into()));
    }
    let log_sq = (nc as f64).log2().powi(2);
    let c = params.concurrency as f64;
    let mut cost = 0.0;
    for i in 1..=search_levels(params.n, nc) {
        let bound = prune_retention_bound(params.sigma_sq, params.radius, i)?;
        let rows = (nc as f64).powi(i as i32) * bound;
        let rounds = (rows / c).ceil().max(1.0);
        cost += f64::from(i * i) * rounds * log_sq;
    }
    Ok(cost)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Recommendation {
    pub node_capacity: usize,
    /// `(Nc, estimated cost)` for every candidate, in input order.
    pub table: Vec<(usize, f64)>,
}

/// The candidate with the lowest estimated cost; ties go to the smaller Nc.
pub fn recommend_node_capacity(
    n: usize,
    concurrency: usize,
    sigma_sq: f64,
    radius: f64,
    candidates: &[usize],
) -> Result<Recommendation> {
    if candidates.is_empty() {
        return Err(Error::Config("no candidate node capacities".into()));
    }
    let table = candidates
        .iter()
        .map(|&nc| {
            let params = CostParams {
                n,
                node_capacity: nc,
                sigma_sq,
                radius,
                concurrency,
            };
            Ok((nc, estimate_range_cost(&params)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let best = table
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .expect("non-empty")
        .0;
    Ok(Recommendation {
        node_capacity: best,
        table,
    })
}
