//! Brute-force reference answers. Shares nothing with the index code paths.

use crate::error::{Error, Result};
use crate::metric::{DataObject, MetricKind, Payload};
use crate::query::Neighbor;

/// Every object within `radius` of `query`, ascending `(distance, id)`.
pub fn brute_range<'a, I>(metric: MetricKind, objects: I, query: &Payload, radius: f64) -> Result<Vec<Neighbor>>
where
    I: IntoIterator<Item = &'a DataObject>,
{
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::UndefinedRadius(radius));
    }
    let mut out = Vec::new();
    for o in objects {
        let d = metric.distance(query, &o.payload)?;
        if d <= radius {
            out.push(Neighbor::new(o.id, d));
        }
    }
    out.sort_by(Neighbor::order);
    Ok(out)
}

/// The `min(k, n)` nearest objects, ascending `(distance, id)`.
pub fn brute_knn<'a, I>(metric: MetricKind, objects: I, query: &Payload, k: usize) -> Result<Vec<Neighbor>>
where
    I: IntoIterator<Item = &'a DataObject>,
{
    let mut all = objects
        .into_iter()
        .map(|o| Ok(Neighbor::new(o.id, metric.distance(query, &o.payload)?)))
        .collect::<Result<Vec<_>>>()?;
    all.sort_by(Neighbor::order);
    all.truncate(k);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn objs() -> Vec<DataObject> {
        [0.0, 3.0, 1.0, 5.0]
            .iter()
            .enumerate()
            .map(|(i, &x)| DataObject::new(i as u32, Payload::Vector(vec![x])))
            .collect()
    }

    #[test]
    fn range_and_knn_on_a_line() {
        let q = Payload::Vector(vec![2.0]);
        let r = brute_range(MetricKind::L1Norm, &objs(), &q, 1.0).unwrap();
        assert_eq!(r, vec![Neighbor::new(1, 1.0), Neighbor::new(2, 1.0)]);
        let k = brute_knn(MetricKind::L1Norm, &objs(), &q, 3).unwrap();
        assert_eq!(k.iter().map(|n| n.id).collect::<Vec<_>>(), vec![1, 2, 0]);
        assert_eq!(brute_knn(MetricKind::L1Norm, &objs(), &q, 10).unwrap().len(), 4);
        assert!(brute_range(MetricKind::L1Norm, &objs(), &q, -1.0).is_err());
    }
}
