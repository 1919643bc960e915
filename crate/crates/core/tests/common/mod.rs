#![allow(dead_code)]

use std::collections::BTreeSet;

use gts_core::index::{select_pivot_fft, GtsIndex, NO_PIVOT};
use gts_core::metric::{Dataset, MetricKind, Payload};
use gts_core::query::Neighbor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn words_5000() -> Vec<Payload> {
    include_str!("../data/words_5000.txt")
        .lines()
        .map(|w| Payload::Text(w.to_string()))
        .collect()
}

pub fn vectors(n: usize, dim: usize, seed: u64) -> Vec<Payload> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Payload::Vector((0..dim).map(|_| rng.random::<f64>()).collect()))
        .collect()
}

pub fn strings(n: usize, alphabet: &[u8], max_len: usize, seed: u64) -> Vec<Payload> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.random_range(0..=max_len);
            Payload::Text((0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())] as char).collect())
        })
        .collect()
}

/// Levels and node count recomputed from first principles.
fn expected_shape(n: usize, nc: usize) -> (usize, usize) {
    if n == 0 {
        return (0, 0);
    }
    let mut e = 0u32;
    while (nc as u128).pow(e) < n as u128 + 1 {
        e += 1;
    }
    let max_h = (e as usize).saturating_sub(1);
    let levels = max_h.saturating_sub(1) + 1;
    let nodes = (0..levels).map(|l| nc.pow(l as u32)).sum();
    (levels, nodes)
}

/// Checks every structural property of a built index against direct
/// recomputation. `check_fft` also re-derives non-root pivots.
pub fn check_invariants(index: &GtsIndex, check_fft: bool) -> Result<(), String> {
    let n = index.len();
    let nc = index.node_capacity();
    let ds = index.dataset();
    let metric = ds.metric();
    let nodes = index.nodes();
    let table = index.table();

    let (levels, count) = expected_shape(n, nc);
    if nodes.levels() != levels || nodes.len() != count {
        return Err(format!(
            "shape: levels {} nodes {}, expected {levels} / {count}",
            nodes.levels(),
            nodes.len()
        ));
    }
    if n == 0 {
        return if table.is_empty() { Ok(()) } else { Err("empty index with entries".into()) };
    }

    let slots: BTreeSet<u32> = table.iter().map(|e| e.slot).collect();
    if table.len() != n || slots.len() != n || slots.iter().next_back() != Some(&(n as u32 - 1)) {
        return Err("leaf table is not a permutation of the objects".into());
    }
    let root = nodes.get(1);
    if root.pos != 0 || root.size != n {
        return Err("root does not cover the table".into());
    }

    let d = |a: u32, b: u32| metric.distance(&ds.get(a as usize).payload, &ds.get(b as usize).payload).unwrap();
    let members = |id: usize| -> Vec<u32> { table[nodes.get(id).segment()].iter().map(|e| e.slot).collect() };
    let first_leaf = count - nc.pow(levels as u32 - 1) + 1;

    for id in 1..=count {
        let node = nodes.get(id);
        let m = members(id);
        if m.is_empty() {
            if node.pivot != NO_PIVOT {
                return Err(format!("node {id}: empty with a pivot"));
            }
            continue;
        }
        if !m.contains(&node.pivot) {
            return Err(format!("node {id}: pivot outside node"));
        }

        // Bounds are distances from the parent's pivot (own pivot for the root).
        let reference = if id == 1 { node.pivot } else { nodes.get((id - 2) / nc + 1).pivot };
        let dists: Vec<f64> = m.iter().map(|&s| d(s, reference)).collect();
        let lo = dists.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = dists.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if lo != node.min_dis || hi != node.max_dis {
            return Err(format!(
                "node {id}: bounds [{}, {}] but members span [{lo}, {hi}]",
                node.min_dis, node.max_dis
            ));
        }

        if check_fft && id > 1 {
            let ids: Vec<u32> = m.iter().map(|&s| ds.get(s as usize).id).collect();
            let anc = index.ancestor_pivots(id);
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let want = select_pivot_fft(ds, &ids, &anc, &mut rng).unwrap();
            if index.pivot_id(id) != Some(want) {
                return Err(format!("node {id}: pivot is not the farthest-first pick"));
            }
        }

        if id >= first_leaf {
            let seg = &table[node.segment()];
            for (e, &s) in seg.iter().zip(&m) {
                if e.dis != d(s, node.pivot) {
                    return Err(format!("leaf {id}: stored distance differs"));
                }
            }
            if seg.windows(2).any(|w| (w[0].dis, w[0].slot) > (w[1].dis, w[1].slot)) {
                return Err(format!("leaf {id}: segment unsorted"));
            }
            continue;
        }

        // Children: addressing, balance rule, ordered split by pivot distance.
        let avg = node.size / nc;
        let mut prev_max: Option<(f64, u32)> = None;
        for j in 1..=nc {
            let cid = (id - 1) * nc + j + 1;
            let child = nodes.get(cid);
            let want_size = if j < nc { avg } else { node.size - avg * (nc - 1) };
            if child.pos != node.pos + (j - 1) * avg || child.size != want_size {
                return Err(format!("node {id}: child {j} has pos/size {}/{}", child.pos, child.size));
            }
            let keys: Vec<(f64, u32)> = members(cid).iter().map(|&s| (d(s, node.pivot), s)).collect();
            let kmin = keys.iter().cloned().reduce(|a, b| if b < a { b } else { a });
            let kmax = keys.iter().cloned().reduce(|a, b| if b > a { b } else { a });
            if let (Some(p), Some(k)) = (prev_max, kmin) {
                if p > k {
                    return Err(format!("node {id}: children {} and {j} overlap", j - 1));
                }
            }
            if kmax.is_some() {
                prev_max = kmax;
            }
        }
    }
    Ok(())
}

pub fn ids(answer: &[Neighbor]) -> Vec<u32> {
    answer.iter().map(|n| n.id).collect()
}

pub fn dists(answer: &[Neighbor]) -> Vec<f64> {
    answer.iter().map(|n| n.distance).collect()
}

/// Distances agree exactly for integral metrics and to `1e-9` relative
/// otherwise.
pub fn same_distances(metric: MetricKind, a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            if metric.is_integral() {
                x.to_bits() == y.to_bits()
            } else {
                (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1e-300)
            }
        })
}

/// A kNN answer is valid if its distances are the true ones, ids are
/// distinct, and every listed object is no farther than the k-th oracle
/// distance.
pub fn valid_knn(ds: &Dataset, query: &Payload, got: &[Neighbor], oracle: &[Neighbor]) -> bool {
    let metric = ds.metric();
    let kth = oracle.last().map(|n| n.distance);
    let distinct: BTreeSet<u32> = got.iter().map(|n| n.id).collect();
    distinct.len() == got.len()
        && same_distances(metric, &dists(got), &dists(oracle))
        && got.iter().all(|n| {
            let slot = ds.slot_of(n.id).expect("id in dataset");
            let true_d = metric.distance(query, &ds.get(slot).payload).unwrap();
            true_d == n.distance && kth.is_some_and(|k| true_d <= k)
        })
}
