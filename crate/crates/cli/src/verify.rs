//! Brute-force comparison of engine answers.

use std::collections::BTreeSet;

use gts_core::metric::{DataObject, MetricKind, Payload};
use gts_core::oracle::{brute_knn, brute_range};
use gts_core::query::Neighbor;
use serde::Serialize;

#[derive(Debug, Default, Serialize)]
pub struct Verification {
    pub status: &'static str,
    pub checked: usize,
    pub mismatches: usize,
    /// Query indices of the first few mismatches.
    pub first_mismatches: Vec<usize>,
}

impl Verification {
    pub fn new() -> Self {
        Self {
            status: "pass",
            ..Self::default()
        }
    }

    pub fn record(&mut self, query_index: usize, ok: bool) {
        self.checked += 1;
        if !ok {
            self.mismatches += 1;
            self.status = "fail";
            if self.first_mismatches.len() < 10 {
                self.first_mismatches.push(query_index);
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

fn same_distance(metric: MetricKind, a: f64, b: f64) -> bool {
    if metric.is_integral() {
        a.to_bits() == b.to_bits()
    } else {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
    }
}

/// Same ids and distances as brute force.
pub fn range_matches<'a, I>(metric: MetricKind, objects: I, query: &Payload, radius: f64, got: &[Neighbor]) -> bool
where
    I: IntoIterator<Item = &'a DataObject>,
{
    let Ok(want) = brute_range(metric, objects, query, radius) else {
        return false;
    };
    let mut got = got.to_vec();
    got.sort_by(Neighbor::order);
    got.len() == want.len()
        && got
            .iter()
            .zip(&want)
            .all(|(g, w)| g.id == w.id && same_distance(metric, g.distance, w.distance))
}

/// Distances equal to brute force position by position, with distinct ids
/// each truly at its reported distance. Ties at the k-th distance may pick
/// different ids.
pub fn knn_matches<'a, I>(metric: MetricKind, objects: I, query: &Payload, k: usize, got: &[Neighbor]) -> bool
where
    I: IntoIterator<Item = &'a DataObject> + Clone,
{
    let Ok(want) = brute_knn(metric, objects.clone(), query, k) else {
        return false;
    };
    if got.len() != want.len() {
        return false;
    }
    let ids: BTreeSet<_> = got.iter().map(|n| n.id).collect();
    if ids.len() != got.len() {
        return false;
    }
    if !got.iter().zip(&want).all(|(g, w)| same_distance(metric, g.distance, w.distance)) {
        return false;
    }
    let mut found = 0;
    for o in objects.into_iter().filter(|o| ids.contains(&o.id)) {
        let d = metric.distance(query, &o.payload).unwrap_or(f64::NAN);
        if !got.iter().any(|g| g.id == o.id && g.distance == d) {
            return false;
        }
        found += 1;
    }
    found == got.len()
}
