//! Arithmetic of the flattened full `Nc`-ary tree.

use std::ops::Range;

use crate::error::{Error, Result};

/// Tree height bounds for `n` objects at fan-out `nc`.
///
/// `max_height = ⌈log_nc(n + 1)⌉ − 1` and `split_rounds = max_height − 1`
/// (both floored at zero). The built tree has `split_rounds + 1` levels, so
/// some last-level nodes hold more than `nc` objects.
pub fn tree_height(n: usize, nc: usize) -> (usize, usize) {
    assert!(nc >= 2, "node capacity must be at least 2");
    let target = n as u128 + 1;
    let mut power: u128 = 1;
    let mut exp = 0usize;
    while power < target {
        power *= nc as u128;
        exp += 1;
    }
    let max_h = exp.saturating_sub(1);
    (max_h, max_h.saturating_sub(1))
}

/// Id of the `j`-th child (1-based) of node `i` (1-based).
pub fn child_node_id(i: usize, j: usize, nc: usize) -> Result<usize> {
    if j == 0 || j > nc {
        return Err(Error::Ordinal {
            ordinal: j,
            capacity: nc,
        });
    }
    Ok((i - 1) * nc + j + 1)
}

/// Parent of node `i`; `None` for the root.
pub fn parent_node_id(i: usize, nc: usize) -> Option<usize> {
    (i > 1).then(|| (i - 2) / nc + 1)
}

/// Number of nodes in levels `1..=levels`.
pub fn node_count(levels: usize, nc: usize) -> usize {
    (0..levels).map(|l| nc.pow(l as u32)).sum()
}

/// Node ids (1-based) occupying `level` (1-based).
pub fn level_ids(level: usize, nc: usize) -> Range<usize> {
    let first = node_count(level - 1, nc) + 1;
    first..first + nc.pow(level as u32 - 1)
}

/// Packs a distance and its node ordinal into one sortable key:
/// `dis / (level_max + 1) + ordinal`.
pub fn encode_distance(dis: f64, ordinal: usize, level_max: f64) -> Result<f64> {
    if !(0.0..=level_max).contains(&dis) {
        return Err(Error::DistanceRange { dis, level_max });
    }
    if level_max == 0.0 {
        return Ok(ordinal as f64);
    }
    Ok(dis / (level_max + 1.0) + ordinal as f64)
}

/// Inverse of [`encode_distance`]: returns `(ordinal, dis)`.
pub fn decode_distance(key: f64, level_max: f64) -> (usize, f64) {
    let ordinal = key.floor();
    if level_max == 0.0 {
        return (ordinal as usize, 0.0);
    }
    (ordinal as usize, (key - ordinal) * (level_max + 1.0))
}

/// Decodes when the ordinal is already known, which survives rounding of
/// the fractional part up to the next integer.
pub fn decode_with_ordinal(key: f64, ordinal: usize, level_max: f64) -> f64 {
    if level_max == 0.0 {
        return 0.0;
    }
    ((key - ordinal as f64) * (level_max + 1.0)).clamp(0.0, level_max)
}
