mod common;

use common::{dists, ids, same_distances, strings, valid_knn, vectors};
use gts_core::index::{GtsIndex, IndexConfig};
use gts_core::metric::{Dataset, MetricKind, Payload};
use gts_core::oracle::{brute_knn, brute_range};
use gts_core::query::{size_limit, KnnQuery, RangeQuery, Searcher};
use gts_core::runtime::{MemoryBudget, Runtime};
use gts_core::Error;
use proptest::prelude::*;

fn index(metric: MetricKind, data: Vec<Payload>, nc: usize, seed: u64) -> GtsIndex {
    let rt = Runtime::with_workers(2).unwrap();
    GtsIndex::build(Dataset::from_payloads(metric, data).unwrap(), IndexConfig::new(nc, seed), &rt).unwrap()
}

fn instance(words: bool, n: usize, seed: u64) -> (MetricKind, Vec<Payload>, Vec<Payload>) {
    if words {
        (MetricKind::EditDistance, strings(n, b"abcd", 7, seed), strings(8, b"abcd", 7, seed ^ 1))
    } else {
        (MetricKind::L2Norm, vectors(n, 2, seed), vectors(8, 2, seed ^ 1))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn range_equals_oracle(words in any::<bool>(), n in 1usize..400, nc in 2usize..8, seed in any::<u64>(), r in 0.0f64..3.0) {
        let (metric, data, queries) = instance(words, n, seed);
        let r = if words { r.floor() } else { r / 10.0 };
        let idx = index(metric, data, nc, seed);
        let rt = Runtime::with_workers(2).unwrap();
        let qs: Vec<_> = queries.iter().map(|q| RangeQuery::new(q.clone(), r)).collect();
        let got = Searcher::new(&idx, &rt).range(&qs, &mut MemoryBudget::new(4096)).unwrap();
        for (q, a) in queries.iter().zip(&got.answers) {
            prop_assert_eq!(a, &brute_range(metric, idx.dataset().objects(), q, r).unwrap());
        }
    }

    #[test]
    fn knn_equals_oracle(words in any::<bool>(), n in 1usize..400, nc in 2usize..8, seed in any::<u64>(), k in 1usize..40) {
        let (metric, data, queries) = instance(words, n, seed);
        let idx = index(metric, data, nc, seed);
        let rt = Runtime::with_workers(2).unwrap();
        let qs: Vec<_> = queries.iter().map(|q| KnnQuery::new(q.clone(), k)).collect();
        let got = Searcher::new(&idx, &rt).knn(&qs, &mut MemoryBudget::new(4096)).unwrap();
        for (i, q) in queries.iter().enumerate() {
            let want = brute_knn(metric, idx.dataset().objects(), q, k).unwrap();
            prop_assert!(valid_knn(idx.dataset(), q, &got.answers[i], &want));
            // The bound never grows as the search descends.
            prop_assert!(got.bounds[i].windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn batch_matches_one_at_a_time(seed in any::<u64>(), cap in 80usize..600) {
        let (metric, data, queries) = instance(false, 500, seed);
        let idx = index(metric, data, 3, seed);
        let rt = Runtime::with_workers(2).unwrap();
        let s = Searcher::new(&idx, &rt);
        let rq: Vec<_> = queries.iter().map(|q| RangeQuery::new(q.clone(), 0.15)).collect();
        let kq: Vec<_> = queries.iter().map(|q| KnnQuery::new(q.clone(), 6)).collect();
        let batch_r = s.range(&rq, &mut MemoryBudget::new(cap)).unwrap();
        let batch_k = s.knn(&kq, &mut MemoryBudget::new(cap)).unwrap();
        for i in 0..queries.len() {
            let one_r = s.range(&rq[i..=i], &mut MemoryBudget::new(cap)).unwrap();
            let one_k = s.knn(&kq[i..=i], &mut MemoryBudget::new(cap)).unwrap();
            prop_assert_eq!(&batch_r.answers[i], &one_r.answers[0]);
            prop_assert_eq!(dists(&batch_k.answers[i]), dists(&one_k.answers[0]));
        }
    }
}

#[test]
fn budget_is_respected_and_logged() {
    let idx = index(MetricKind::L2Norm, vectors(20_000, 2, 4), 5, 4);
    let rt = Runtime::with_workers(2).unwrap();
    let queries = vectors(300, 2, 5);
    let s = Searcher::new(&idx, &rt);
    let h = idx.nodes().split_rounds();
    for cap in [h * 5 + 1, 64, 333, 5000] {
        let mut budget = MemoryBudget::new(cap);
        let rq: Vec<_> = queries.iter().map(|q| RangeQuery::new(q.clone(), 0.02)).collect();
        let got = s.range(&rq, &mut budget).unwrap();
        assert!(budget.peak() <= cap);
        assert_eq!(budget.in_use(), 0);
        for t in &got.trace {
            assert_eq!(t.size_limit, size_limit(t.available, t.split_rounds, t.layer, t.node_capacity));
            assert!(t.max_expanded <= t.available);
        }
        for (q, a) in queries.iter().zip(&got.answers) {
            assert_eq!(a, &brute_range(MetricKind::L2Norm, idx.dataset().objects(), q, 0.02).unwrap());
        }
        let kq: Vec<_> = queries.iter().map(|q| KnnQuery::new(q.clone(), 5)).collect();
        let got = s.knn(&kq, &mut budget).unwrap();
        assert!(budget.peak() <= cap);
        for (q, a) in queries.iter().zip(&got.answers) {
            let want = brute_knn(MetricKind::L2Norm, idx.dataset().objects(), q, 5).unwrap();
            assert!(valid_knn(idx.dataset(), q, a, &want));
        }
    }
    let too_small = h * 5;
    let err = s
        .range(&[RangeQuery::new(queries[0].clone(), 0.1)], &mut MemoryBudget::new(too_small))
        .unwrap_err();
    assert!(matches!(err, Error::BudgetTooSmall { .. }));
}

#[test]
fn tombstones_are_never_returned() {
    let mut idx = index(MetricKind::L1Norm, vectors(800, 2, 8), 4, 8);
    let rt = Runtime::with_workers(1).unwrap();
    // Delete every pivot plus some ordinary objects.
    let mut dead: Vec<u32> = (1..=idx.nodes().len()).filter_map(|n| idx.pivot_id(n)).collect();
    dead.extend((0..800).step_by(7));
    for &id in &dead {
        idx.set_tombstone(id, true);
    }
    let live: Vec<_> = idx.live_objects().cloned().collect();
    let queries = vectors(20, 2, 9);
    let s = Searcher::new(&idx, &rt);
    let mut budget = MemoryBudget::new(2000);
    let rq: Vec<_> = queries.iter().map(|q| RangeQuery::new(q.clone(), 0.2)).collect();
    let kq: Vec<_> = queries.iter().map(|q| KnnQuery::new(q.clone(), 10)).collect();
    let r = s.range(&rq, &mut budget).unwrap();
    let k = s.knn(&kq, &mut budget).unwrap();
    for (i, q) in queries.iter().enumerate() {
        assert_eq!(r.answers[i], brute_range(MetricKind::L1Norm, &live, q, 0.2).unwrap());
        let want = brute_knn(MetricKind::L1Norm, &live, q, 10).unwrap();
        assert!(same_distances(MetricKind::L1Norm, &dists(&k.answers[i]), &dists(&want)));
        assert!(ids(&k.answers[i]).iter().all(|id| !dead.contains(id)));
    }
}

#[test]
fn edge_queries() {
    let data = strings(300, b"ab", 5, 3);
    let idx = index(MetricKind::EditDistance, data.clone(), 3, 1);
    let rt = Runtime::with_workers(1).unwrap();
    let s = Searcher::new(&idx, &rt);
    let mut budget = MemoryBudget::new(1000);

    // r = 0 returns exactly the objects equal to the query.
    let q = data[17].clone();
    let got = s.range(&[RangeQuery::new(q.clone(), 0.0)], &mut budget).unwrap();
    let equal: Vec<u32> = (0..300u32).filter(|&i| data[i as usize] == q).collect();
    assert_eq!(ids(&got.answers[0]), equal);

    // k = 0, k ≥ n, and an indexed payload at k = 1.
    let got = s
        .knn(&[KnnQuery::new(q.clone(), 0), KnnQuery::new(q.clone(), 1000), KnnQuery::new(q.clone(), 1)], &mut budget)
        .unwrap();
    assert!(got.answers[0].is_empty());
    assert_eq!(got.answers[1].len(), 300);
    assert_eq!(got.answers[2][0].distance, 0.0);

    // Empty batch, wrong payload kind, negative radius.
    assert!(s.range(&[], &mut budget).unwrap().answers.is_empty());
    assert!(matches!(
        s.range(&[RangeQuery::new(Payload::Vector(vec![1.0]), 1.0)], &mut budget),
        Err(Error::MetricMismatch { .. })
    ));
    assert!(s.range(&[RangeQuery::new(q, -1.0)], &mut budget).is_err());

    let empty = index(MetricKind::EditDistance, Vec::new(), 3, 1);
    let got = Searcher::new(&empty, &rt)
        .knn(&[KnnQuery::new(Payload::Text("x".into()), 3)], &mut budget)
        .unwrap();
    assert!(got.answers[0].is_empty());
}
