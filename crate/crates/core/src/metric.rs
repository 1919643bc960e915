//! Metric objects and the distance functions defined over them.
//!
//! Every [`MetricKind`] is symmetric, non-negative and satisfies the triangle
//! inequality, which is what makes pivot pruning exact. Angular distance is
//! zero on positive multiples of a vector, so it is a metric on directions.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ObjectId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricKind {
    /// Unit-cost insert/delete/replace distance over characters or symbols.
    EditDistance,
    L1Norm,
    L2Norm,
    /// `arccos` of the cosine similarity, in `[0, π]`.
    AngularDistance,
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "edit" | "edit-distance" | "levenshtein" => Ok(Self::EditDistance),
            "l1" | "l1-norm" | "manhattan" => Ok(Self::L1Norm),
            "l2" | "l2-norm" | "euclidean" => Ok(Self::L2Norm),
            "angular" | "angular-distance" => Ok(Self::AngularDistance),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

impl MetricKind {
    pub(crate) fn code(self) -> u8 {
        match self {
            MetricKind::EditDistance => 0,
            MetricKind::L1Norm => 1,
            MetricKind::L2Norm => 2,
            MetricKind::AngularDistance => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => MetricKind::EditDistance,
            1 => MetricKind::L1Norm,
            2 => MetricKind::L2Norm,
            3 => MetricKind::AngularDistance,
            _ => return None,
        })
    }

    /// Whether distances under this metric are always whole numbers.
    pub fn is_integral(self) -> bool {
        matches!(self, MetricKind::EditDistance)
    }

    /// Checks that `a` and `b` can be compared under this metric.
    pub fn check(self, a: &Payload, b: &Payload) -> Result<()> {
        let ok = match (self, a, b) {
            (MetricKind::EditDistance, Payload::Text(_), Payload::Text(_)) => true,
            (MetricKind::EditDistance, Payload::Sequence(_), Payload::Sequence(_)) => true,
            (_, Payload::Vector(x), Payload::Vector(y)) if self != MetricKind::EditDistance => {
                x.len() == y.len()
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::MetricMismatch {
                metric: self,
                left: a.describe(),
                right: b.describe(),
            })
        }
    }

    /// Distance between two payloads, validating compatibility first.
    pub fn distance(self, a: &Payload, b: &Payload) -> Result<f64> {
        self.check(a, b)?;
        Ok(self.eval(a, b))
    }

    /// Distance between two payloads already known to be compatible.
    ///
    /// Incompatible inputs are a caller bug; in release builds they yield NaN.
    pub(crate) fn eval(self, a: &Payload, b: &Payload) -> f64 {
        match (self, a, b) {
            (MetricKind::EditDistance, Payload::Text(x), Payload::Text(y)) => {
                text_edit_distance(x, y) as f64
            }
            (MetricKind::EditDistance, Payload::Sequence(x), Payload::Sequence(y)) => {
                levenshtein(x, y) as f64
            }
            (MetricKind::L1Norm, Payload::Vector(x), Payload::Vector(y)) => l1(x, y),
            (MetricKind::L2Norm, Payload::Vector(x), Payload::Vector(y)) => l2(x, y),
            (MetricKind::AngularDistance, Payload::Vector(x), Payload::Vector(y)) => {
                angular(x, y)
            }
            _ => {
                debug_assert!(false, "incompatible payloads reached eval");
                f64::NAN
            }
        }
    }
}

/// Free-function form of [`MetricKind::distance`].
pub fn distance(metric: MetricKind, a: &DataObject, b: &DataObject) -> Result<f64> {
    metric.distance(&a.payload, &b.payload)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Payload {
    Text(String),
    Vector(Vec<f64>),
    /// Symbol string, typically over `{A, C, G, T, N}`.
    Sequence(Vec<u8>),
}

impl Payload {
    fn describe(&self) -> String {
        match self {
            Payload::Text(_) => "text".to_string(),
            Payload::Vector(v) => format!("vector[{}]", v.len()),
            Payload::Sequence(_) => "sequence".to_string(),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Payload::Vector(v) => Some(v.len()),
            _ => None,
        }
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Text(s) => f.write_str(s),
            Payload::Sequence(s) => f.write_str(&String::from_utf8_lossy(s)),
            Payload::Vector(v) => {
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataObject {
    pub id: ObjectId,
    pub payload: Payload,
}

impl DataObject {
    pub fn new(id: ObjectId, payload: Payload) -> Self {
        Self { id, payload }
    }
}

/// An ordered collection of objects under one metric.
///
/// Objects are kept in strictly ascending id order, so a position in
/// `objects` (a "slot") orders the same way as the id it holds.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    objects: Vec<DataObject>,
    metric: MetricKind,
    dim: Option<usize>,
}

impl Dataset {
    pub fn new(metric: MetricKind, objects: Vec<DataObject>) -> Result<Self> {
        let mut dim = None;
        for (i, obj) in objects.iter().enumerate() {
            if i > 0 && objects[i - 1].id >= obj.id {
                return Err(Error::InvalidDataset(format!(
                    "ids must be strictly ascending (id {} after {})",
                    obj.id,
                    objects[i - 1].id
                )));
            }
            metric.check(&obj.payload, &obj.payload)?;
            match (dim, obj.payload.dim()) {
                (None, d) if i == 0 => dim = d,
                (Some(d0), Some(d)) if d0 != d => {
                    return Err(Error::InvalidDataset(format!(
                        "object {} has dimension {d}, expected {d0}",
                        obj.id
                    )))
                }
                _ => {}
            }
        }
        Ok(Self {
            objects,
            metric,
            dim,
        })
    }

    /// Builds a dataset assigning ids `0..n` in order.
    pub fn from_payloads(metric: MetricKind, payloads: Vec<Payload>) -> Result<Self> {
        let objects = payloads
            .into_iter()
            .enumerate()
            .map(|(i, p)| DataObject::new(i as ObjectId, p))
            .collect();
        Self::new(metric, objects)
    }

    pub fn empty(metric: MetricKind) -> Self {
        Self {
            objects: Vec::new(),
            metric,
            dim: None,
        }
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn objects(&self) -> &[DataObject] {
        &self.objects
    }

    pub fn into_objects(self) -> Vec<DataObject> {
        self.objects
    }

    pub fn get(&self, slot: usize) -> &DataObject {
        &self.objects[slot]
    }

    pub(crate) fn payload(&self, slot: u32) -> &Payload {
        &self.objects[slot as usize].payload
    }

    pub(crate) fn id_of(&self, slot: u32) -> ObjectId {
        self.objects[slot as usize].id
    }

    /// Slot holding `id`, if present.
    pub fn slot_of(&self, id: ObjectId) -> Option<usize> {
        self.objects.binary_search_by_key(&id, |o| o.id).ok()
    }

    /// Validates that `payload` can be compared against this dataset's objects.
    pub fn check_query(&self, payload: &Payload) -> Result<()> {
        match self.objects.first() {
            Some(first) => self.metric.check(payload, &first.payload),
            // Nothing to compare against; still reject kind mismatches.
            None => self.metric.check(payload, payload),
        }
    }
}

/// Levenshtein distance with unit costs, two-row dynamic programming.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let replace = prev[j] + usize::from(ca != cb);
            cur[j + 1] = replace.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn text_edit_distance(a: &str, b: &str) -> usize {
    if a.is_ascii() && b.is_ascii() {
        levenshtein(a.as_bytes(), b.as_bytes())
    } else {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        levenshtein(&a, &b)
    }
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn angular(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    match (na == 0.0, nb == 0.0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => PI,
        (false, false) => {
            if a == b {
                return 0.0;
            }
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            (dot / (na * nb)).clamp(-1.0, 1.0).acos()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(s: &str) -> Payload {
        Payload::Text(s.to_string())
    }

    fn vector(v: &[f64]) -> Payload {
        Payload::Vector(v.to_vec())
    }

    #[test]
    fn edit_distance_examples() {
        let m = MetricKind::EditDistance;
        assert_eq!(m.distance(&text("kitten"), &text("sitting")).unwrap(), 3.0);
        assert_eq!(m.distance(&text(""), &text("abc")).unwrap(), 3.0);
        assert_eq!(m.distance(&text("abc"), &text("abc")).unwrap(), 0.0);
        // multi-byte characters count once
        assert_eq!(m.distance(&text("héllo"), &text("hello")).unwrap(), 1.0);
        let seq = |s: &str| Payload::Sequence(s.as_bytes().to_vec());
        assert_eq!(m.distance(&seq("ACGT"), &seq("AGT")).unwrap(), 1.0);
    }

    #[test]
    fn vector_norms() {
        let a = vector(&[0.0, 0.0]);
        let b = vector(&[3.0, 4.0]);
        assert_eq!(MetricKind::L1Norm.distance(&a, &b).unwrap(), 7.0);
        assert_eq!(MetricKind::L2Norm.distance(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn angular_zero_vectors() {
        let m = MetricKind::AngularDistance;
        let z = vector(&[0.0, 0.0]);
        let x = vector(&[1.0, 0.0]);
        assert_eq!(m.distance(&z, &z).unwrap(), 0.0);
        assert_eq!(m.distance(&z, &x).unwrap(), PI);
        assert_eq!(m.distance(&x, &z).unwrap(), PI);
        let y = vector(&[0.0, 2.0]);
        assert!((m.distance(&x, &y).unwrap() - PI / 2.0).abs() < 1e-15);
        let opposite = vector(&[-1.0, 0.0]);
        assert!((m.distance(&x, &opposite).unwrap() - PI).abs() < 1e-15);
    }

    #[test]
    fn mismatch_is_an_error() {
        let err = MetricKind::L2Norm.distance(&vector(&[1.0]), &vector(&[1.0, 2.0]));
        assert!(matches!(err, Err(Error::MetricMismatch { .. })));
        let err = MetricKind::EditDistance.distance(&text("a"), &vector(&[1.0]));
        assert!(matches!(err, Err(Error::MetricMismatch { .. })));
        let err = MetricKind::L1Norm.distance(&text("a"), &text("b"));
        assert!(err.is_err());
        let seq = Payload::Sequence(b"AC".to_vec());
        assert!(MetricKind::EditDistance.distance(&text("AC"), &seq).is_err());
    }

    #[test]
    fn dataset_rejects_mixed_dimensions() {
        let err = Dataset::from_payloads(
            MetricKind::L2Norm,
            vec![vector(&[1.0, 2.0]), vector(&[1.0])],
        );
        assert!(err.is_err());
    }

    #[test]
    fn dataset_requires_ascending_ids() {
        let objs = vec![
            DataObject::new(3, vector(&[1.0])),
            DataObject::new(1, vector(&[2.0])),
        ];
        assert!(Dataset::new(MetricKind::L1Norm, objs).is_err());
        let objs = vec![
            DataObject::new(1, vector(&[1.0])),
            DataObject::new(7, vector(&[2.0])),
        ];
        let ds = Dataset::new(MetricKind::L1Norm, objs).unwrap();
        assert_eq!(ds.slot_of(7), Some(1));
        assert_eq!(ds.slot_of(2), None);
    }
}
