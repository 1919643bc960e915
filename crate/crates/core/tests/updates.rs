mod common;

use std::collections::BTreeMap;

use common::{dists, vectors};
use gts_core::index::{GtsIndex, IndexConfig};
use gts_core::metric::{DataObject, Dataset, MetricKind, Payload};
use gts_core::oracle::{brute_knn, brute_range};
use gts_core::query::{KnnQuery, RangeQuery};
use gts_core::runtime::{MemoryBudget, Runtime};
use gts_core::update::UpdateEngine;
use gts_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const METRIC: MetricKind = MetricKind::L2Norm;

fn engine(rt: &Runtime, n: usize, cap: usize) -> (UpdateEngine<'_>, BTreeMap<u32, Payload>) {
    let data = vectors(n, 2, 1);
    let ds = Dataset::from_payloads(METRIC, data.clone()).unwrap();
    let idx = GtsIndex::build(ds, IndexConfig::new(5, 3), rt).unwrap();
    let tracked = data.into_iter().enumerate().map(|(i, p)| (i as u32, p)).collect();
    (UpdateEngine::new(idx, cap, rt), tracked)
}

fn objects(tracked: &BTreeMap<u32, Payload>) -> Vec<DataObject> {
    tracked.iter().map(|(&id, p)| DataObject::new(id, p.clone())).collect()
}

fn assert_matches(e: &UpdateEngine<'_>, tracked: &BTreeMap<u32, Payload>, q: &Payload) {
    let objs = objects(tracked);
    let mut budget = MemoryBudget::new(500);
    let r = e.range(&[RangeQuery::new(q.clone(), 0.1)], &mut budget).unwrap();
    assert_eq!(r.answers[0], brute_range(METRIC, &objs, q, 0.1).unwrap());
    let k = e.knn(&[KnnQuery::new(q.clone(), 7)], &mut budget).unwrap();
    assert_eq!(dists(&k.answers[0]), dists(&brute_knn(METRIC, &objs, q, 7).unwrap()));
    assert_eq!(budget.in_use(), 0);
}

#[test]
fn random_mixed_operations_track_the_logical_set() {
    let rt = Runtime::with_workers(2).unwrap();
    for cap in [1, 16, 200] {
        let (mut e, mut tracked) = engine(&rt, 400, cap);
        let mut rng = ChaCha8Rng::seed_from_u64(cap as u64);
        let mut next_id = 400u32;
        let mut expected_rebuilds = 0;
        for step in 0..600 {
            let roll = rng.random_range(0..10);
            if roll < 4 && !tracked.is_empty() {
                let keys: Vec<u32> = tracked.keys().copied().collect();
                let id = keys[rng.random_range(0..keys.len())];
                e.delete(id).unwrap();
                tracked.remove(&id);
            } else if roll < 8 {
                let p = Payload::Vector(vec![rng.random(), rng.random()]);
                let before = e.cache().len();
                e.insert(DataObject::new(next_id, p.clone())).unwrap();
                if before + 1 > cap {
                    expected_rebuilds += 1;
                }
                tracked.insert(next_id, p);
                next_id += 1;
            } else {
                let q = Payload::Vector(vec![rng.random(), rng.random()]);
                assert_matches(&e, &tracked, &q);
            }
            assert!(e.cache().len() <= cap, "step {step}");
            assert_eq!(e.logical_ids(), tracked.keys().copied().collect::<Vec<_>>());
        }
        assert_eq!(e.rebuilds(), expected_rebuilds);
    }
}

#[test]
fn deleting_pivots_keeps_answers_exact() {
    let rt = Runtime::with_workers(1).unwrap();
    let (mut e, mut tracked) = engine(&rt, 500, 64);
    let pivots: Vec<u32> = (1..=e.index().nodes().len()).filter_map(|n| e.index().pivot_id(n)).collect();
    for id in pivots {
        e.delete(id).unwrap();
        tracked.remove(&id);
    }
    for q in vectors(30, 2, 77) {
        assert_matches(&e, &tracked, &q);
    }
}

#[test]
fn rebuild_preserves_answers_and_is_deterministic() {
    let rt = Runtime::with_workers(2).unwrap();
    let (mut e, mut tracked) = engine(&rt, 300, 100);
    let untouched = e.index().snapshot_bytes();
    e.flush_rebuild().unwrap();
    assert_eq!(e.index().snapshot_bytes(), untouched);

    for i in 0..50u32 {
        let p = Payload::Vector(vec![f64::from(i) / 50.0, 0.5]);
        e.insert(DataObject::new(1000 + i, p.clone())).unwrap();
        tracked.insert(1000 + i, p);
        e.delete(i * 3).unwrap();
        tracked.remove(&(i * 3));
    }
    let queries = vectors(20, 2, 5);
    let mut budget = MemoryBudget::new(500);
    let rq: Vec<_> = queries.iter().map(|q| RangeQuery::new(q.clone(), 0.12)).collect();
    let before = e.range(&rq, &mut budget).unwrap().answers;
    e.flush_rebuild().unwrap();
    assert_eq!(e.range(&rq, &mut budget).unwrap().answers, before);
    assert!(e.cache().is_empty() && e.cache().tombstones().is_empty());
    assert_eq!(e.index().tombstone_count(), 0);
    assert_eq!(e.logical_ids(), tracked.keys().copied().collect::<Vec<_>>());

    let ds = Dataset::new(METRIC, objects(&tracked)).unwrap();
    let fresh = GtsIndex::build(ds, IndexConfig::new(5, 3), &rt).unwrap();
    assert_eq!(fresh.snapshot_bytes(), e.index().snapshot_bytes());
}

#[test]
fn batch_update_remove_and_reinsert_tenth() {
    let rt = Runtime::with_workers(2).unwrap();
    let (mut e, tracked) = engine(&rt, 1000, 512);
    let queries = vectors(25, 2, 6);
    let mut budget = MemoryBudget::new(800);
    let rq: Vec<_> = queries.iter().map(|q| RangeQuery::new(q.clone(), 0.05)).collect();
    let before = e.range(&rq, &mut budget).unwrap().answers;

    let tenth: Vec<u32> = (0..1000).step_by(10).collect();
    e.batch_update(Vec::new(), &tenth).unwrap();
    assert_eq!(e.len(), 900);
    let back = tenth.iter().map(|&id| DataObject::new(id, tracked[&id].clone())).collect();
    e.batch_update(back, &[]).unwrap();
    assert_eq!(e.range(&rq, &mut budget).unwrap().answers, before);

    let snapshot = e.index().snapshot_bytes();
    e.batch_update(Vec::new(), &[]).unwrap();
    assert_eq!(e.index().snapshot_bytes(), snapshot);

    assert!(matches!(e.batch_update(Vec::new(), &[5000]), Err(Error::NotFound(5000))));
    let dup = vec![DataObject::new(1, Payload::Vector(vec![0.0, 0.0]))];
    assert!(matches!(e.batch_update(dup, &[]), Err(Error::DuplicateId(1))));
}

#[test]
fn cache_only_answers_and_read_your_write() {
    let rt = Runtime::with_workers(1).unwrap();
    let mut e = UpdateEngine::empty(METRIC, IndexConfig::new(4, 0), 10, &rt).unwrap();
    let p = Payload::Vector(vec![0.25, 0.75]);
    e.insert(DataObject::new(9, p.clone())).unwrap();
    let mut budget = MemoryBudget::new(100);
    let got = e.range(&[RangeQuery::new(p.clone(), 0.0)], &mut budget).unwrap();
    assert_eq!(got.answers[0].len(), 1);
    assert_eq!(got.answers[0][0].id, 9);
    assert!(matches!(
        e.insert(DataObject::new(10, Payload::Vector(vec![1.0]))),
        Err(Error::MetricMismatch { .. })
    ));
}
