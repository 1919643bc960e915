//! Seeded synthetic data and relative-radius helpers.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{Dataset, Payload};

/// Points uniform in `[0, 1)^dim`.
pub fn uniform_vectors(n: usize, dim: usize, seed: u64) -> Vec<Payload> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Payload::Vector((0..dim).map(|_| rng.random::<f64>()).collect()))
        .collect()
}

/// `clusters` Gaussian blobs with uniform centres in `[0, 1)^dim` and
/// per-coordinate standard deviation `std_dev`; points are assigned to
/// clusters uniformly at random.
pub fn clustered_vectors(n: usize, dim: usize, clusters: usize, std_dev: f64, seed: u64) -> Result<Vec<Payload>> {
    if clusters == 0 {
        return Err(Error::Config("at least one cluster required".into()));
    }
    let noise = Normal::new(0.0, std_dev).map_err(|e| Error::Config(format!("std_dev: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres: Vec<Vec<f64>> = (0..clusters)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    Ok((0..n)
        .map(|_| {
            let c = &centres[rng.random_range(0..clusters)];
            Payload::Vector(c.iter().map(|x| x + noise.sample(&mut rng)).collect())
        })
        .collect())
}

/// Random strings over `alphabet` with lengths in `len_range`.
pub fn random_strings(n: usize, alphabet: &[u8], len_range: std::ops::Range<usize>, seed: u64) -> Vec<Payload> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.random_range(len_range.clone());
            let s = (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())] as char).collect();
            Payload::Text(s)
        })
        .collect()
}

/// What a relative radius is a fraction of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RadiusBase {
    /// Largest sampled pairwise distance.
    Diameter,
    /// Largest per-coordinate range; vectors only.
    CoordRange,
}

impl FromStr for RadiusBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diameter" => Ok(Self::Diameter),
            "coord-range" => Ok(Self::CoordRange),
            other => Err(Error::Config(format!("unknown radius base `{other}`"))),
        }
    }
}

/// Largest distance over `samples` seeded pairs, or over all pairs when
/// that is fewer. A lower estimate of the true diameter.
pub fn estimate_diameter(dataset: &Dataset, samples: usize, seed: u64) -> f64 {
    let n = dataset.len();
    if n < 2 {
        return 0.0;
    }
    let metric = dataset.metric();
    let o = dataset.objects();
    let d = |i: usize, j: usize| metric.eval(&o[i].payload, &o[j].payload);
    if (n as u128) * (n as u128 - 1) / 2 <= samples as u128 {
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(d(i, j));
            }
        }
        return best;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| d(rng.random_range(0..n), rng.random_range(0..n)))
        .fold(0.0, f64::max)
}

/// `max_k (max_i x_ik − min_i x_ik)` over a vector dataset.
pub fn coord_range(dataset: &Dataset) -> Result<f64> {
    let dim = dataset
        .dim()
        .ok_or_else(|| Error::Config("coordinate range needs vector data".into()))?;
    let mut best: f64 = 0.0;
    for k in 0..dim {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for o in dataset.objects() {
            if let Payload::Vector(v) = &o.payload {
                lo = lo.min(v[k]);
                hi = hi.max(v[k]);
            }
        }
        best = best.max(hi - lo);
    }
    Ok(best)
}

pub fn radius_base(dataset: &Dataset, base: RadiusBase, samples: usize, seed: u64) -> Result<f64> {
    match base {
        RadiusBase::Diameter => Ok(estimate_diameter(dataset, samples, seed)),
        RadiusBase::CoordRange => coord_range(dataset),
    }
}

/// Absolute radius for a setting in units of 0.01% of `base`.
pub fn relative_radius(units: f64, base: f64) -> f64 {
    units * 1e-4 * base
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricKind;

    #[test]
    fn generators_are_seeded() {
        assert_eq!(uniform_vectors(5, 3, 9), uniform_vectors(5, 3, 9));
        assert_ne!(uniform_vectors(5, 3, 9), uniform_vectors(5, 3, 10));
        let c = clustered_vectors(50, 2, 3, 0.01, 1).unwrap();
        assert_eq!(c, clustered_vectors(50, 2, 3, 0.01, 1).unwrap());
        assert!(clustered_vectors(5, 2, 0, 0.1, 1).is_err());
    }

    #[test]
    fn radius_bases() {
        let ds = Dataset::from_payloads(
            MetricKind::L1Norm,
            vec![
                Payload::Vector(vec![0.0, 0.0]),
                Payload::Vector(vec![3.0, 1.0]),
                Payload::Vector(vec![1.0, 2.0]),
            ],
        )
        .unwrap();
        assert_eq!(estimate_diameter(&ds, 100, 0), 4.0);
        assert_eq!(coord_range(&ds).unwrap(), 3.0);
        assert_eq!(relative_radius(8.0, 10_000.0), 8.0);
        assert_eq!("coord-range".parse::<RadiusBase>().unwrap(), RadiusBase::CoordRange);
    }
}
