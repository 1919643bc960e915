//! Binary snapshot of a built index.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "GTSI" | version u32 | n u64 | Nc u32 | split_rounds u32 | metric u8 | seed u64
//!        | payload kind u8 | dim u32
//! node count u64 | nodes: pivot u32, min_dis f64, max_dis f64, pos u64, size u64
//! entry count u64 | entries: slot u32, dis f64, tombstone u8
//! objects: id u32, payload (text/sequence: len u32 + bytes; vector: dim × f64)
//! ```

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::metric::{DataObject, Dataset, MetricKind, Payload};

use super::{node_count, GtsIndex, IndexConfig, NodeList, TableEntry, TreeNode};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"GTSI";
pub const SNAPSHOT_VERSION: u32 = 1;

const KIND_NONE: u8 = 0;
const KIND_TEXT: u8 = 1;
const KIND_VECTOR: u8 = 2;
const KIND_SEQUENCE: u8 = 3;

pub fn write_snapshot<W: Write>(index: &GtsIndex, out: &mut W) -> Result<()> {
    let ds = index.dataset();
    let nodes = index.nodes();
    let kind = match ds.objects().first().map(|o| &o.payload) {
        None => KIND_NONE,
        Some(Payload::Text(_)) => KIND_TEXT,
        Some(Payload::Vector(_)) => KIND_VECTOR,
        Some(Payload::Sequence(_)) => KIND_SEQUENCE,
    };

    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    out.write_all(&(ds.len() as u64).to_le_bytes())?;
    out.write_all(&(index.config().node_capacity as u32).to_le_bytes())?;
    out.write_all(&(nodes.split_rounds() as u32).to_le_bytes())?;
    out.write_all(&[ds.metric().code()])?;
    out.write_all(&index.config().seed.to_le_bytes())?;
    out.write_all(&[kind])?;
    out.write_all(&(ds.dim().unwrap_or(0) as u32).to_le_bytes())?;

    out.write_all(&(nodes.len() as u64).to_le_bytes())?;
    for node in nodes.as_slice() {
        out.write_all(&node.pivot.to_le_bytes())?;
        out.write_all(&node.min_dis.to_le_bytes())?;
        out.write_all(&node.max_dis.to_le_bytes())?;
        out.write_all(&(node.pos as u64).to_le_bytes())?;
        out.write_all(&(node.size as u64).to_le_bytes())?;
    }

    out.write_all(&(index.table().len() as u64).to_le_bytes())?;
    for e in index.table() {
        out.write_all(&e.slot.to_le_bytes())?;
        out.write_all(&e.dis.to_le_bytes())?;
        out.write_all(&[u8::from(e.tombstone)])?;
    }

    for obj in ds.objects() {
        out.write_all(&obj.id.to_le_bytes())?;
        match &obj.payload {
            Payload::Text(s) => {
                out.write_all(&(s.len() as u32).to_le_bytes())?;
                out.write_all(s.as_bytes())?;
            }
            Payload::Sequence(s) => {
                out.write_all(&(s.len() as u32).to_le_bytes())?;
                out.write_all(s)?;
            }
            Payload::Vector(v) => {
                for x in v {
                    out.write_all(&x.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf)?;
        Ok(buf)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn vec(&mut self, len: usize) -> Result<Vec<u8>> {
        let mut buf = vec![0u8; len];
        self.inner.read_exact(&mut buf)?;
        Ok(buf)
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Snapshot(msg.into())
}

pub fn read_snapshot<R: Read>(input: R) -> Result<GtsIndex> {
    let mut r = Reader { inner: input };
    if &r.bytes::<4>()? != SNAPSHOT_MAGIC {
        return Err(bad("bad magic"));
    }
    let version = r.u32()?;
    if version != SNAPSHOT_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let n = r.u64()? as usize;
    let nc = r.u32()? as usize;
    let split_rounds = r.u32()? as usize;
    let metric = MetricKind::from_code(r.u8()?).ok_or_else(|| bad("unknown metric"))?;
    let seed = r.u64()?;
    let kind = r.u8()?;
    let dim = r.u32()? as usize;

    let config = IndexConfig::new(nc, seed);
    config.validate()?;
    let mut nodes = NodeList::new(n, nc);
    if nodes.split_rounds() != split_rounds {
        return Err(bad("split rounds disagree with n and Nc"));
    }
    let node_len = r.u64()? as usize;
    if node_len != node_count(nodes.levels(), nc) {
        return Err(bad("node count disagrees with tree shape"));
    }
    for i in 0..node_len {
        nodes.nodes[i] = TreeNode {
            pivot: r.u32()?,
            min_dis: r.f64()?,
            max_dis: r.f64()?,
            pos: r.u64()? as usize,
            size: r.u64()? as usize,
        };
        if nodes.nodes[i].pos + nodes.nodes[i].size > n {
            return Err(bad(format!("node {} segment out of bounds", i + 1)));
        }
    }

    let table_len = r.u64()? as usize;
    if table_len != n {
        return Err(bad("table length differs from n"));
    }
    let mut seen = vec![false; n];
    let mut table = Vec::with_capacity(n);
    for _ in 0..n {
        let slot = r.u32()?;
        let dis = r.f64()?;
        let tombstone = r.u8()? != 0;
        if slot as usize >= n || std::mem::replace(&mut seen[slot as usize], true) {
            return Err(bad(format!("slot {slot} invalid or repeated")));
        }
        table.push(TableEntry {
            slot,
            dis,
            tombstone,
        });
    }

    let mut objects = Vec::with_capacity(n);
    for _ in 0..n {
        let id = r.u32()?;
        let payload = match kind {
            KIND_TEXT => {
                let len = r.u32()? as usize;
                Payload::Text(String::from_utf8(r.vec(len)?).map_err(|_| bad("invalid utf-8"))?)
            }
            KIND_SEQUENCE => {
                let len = r.u32()? as usize;
                Payload::Sequence(r.vec(len)?)
            }
            KIND_VECTOR => Payload::Vector((0..dim).map(|_| r.f64()).collect::<Result<_>>()?),
            _ => return Err(bad("objects present but payload kind is empty")),
        };
        objects.push(DataObject::new(id, payload));
    }
    let dataset = if n == 0 {
        Dataset::empty(metric)
    } else {
        Dataset::new(metric, objects)?
    };
    Ok(GtsIndex::from_parts(config, dataset, nodes, table))
}
