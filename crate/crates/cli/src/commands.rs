use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use gts_core::cost::{estimate_variance, recommend_node_capacity, search_levels};
use gts_core::format::{load_dataset, DatasetFormat};
use gts_core::index::{read_snapshot, write_snapshot, GtsIndex, IndexConfig};
use gts_core::metric::{DataObject, Dataset, MetricKind, Payload};
use gts_core::query::{BatchResult, KnnQuery, RangeQuery, SearchOptions, Searcher};
use gts_core::runtime::{MemoryBudget, ParallelismConfig, Runtime};
use gts_core::synth;
use gts_core::update::UpdateEngine;
use gts_core::workload::{self, Op};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::verify::{knn_matches, range_matches, Verification};
use crate::{
    BuildArgs, Cli, Command, Distribution, GenArgs, Global, QueryArgs, QueryKind, Status, TuneArgs, UpdateArgs,
};

pub fn run(cli: Cli) -> Result<Status> {
    let g = cli.global;
    let mut config = ParallelismConfig::default();
    if let Some(w) = g.workers {
        config.workers = w;
    }
    let rt = Runtime::new(config).context("starting worker pool")?;
    match cli.command {
        Command::Build(a) => build(&g, &rt, a),
        Command::Query(a) => query(&g, &rt, a),
        Command::Update(a) => update(&g, &rt, a),
        Command::Tune(a) => tune(&g, a),
        Command::Gen(a) => gen(&g, a),
    }
}

fn emit(g: &Global, report: &Value) -> Result<()> {
    if g.json {
        println!("{report}");
    } else {
        eprintln!("{}", serde_json::to_string_pretty(report)?);
    }
    if let Some(path) = &g.report {
        fs::write(path, serde_json::to_string_pretty(report)? + "\n")
            .with_context(|| format!("writing report {}", path.display()))?;
    }
    Ok(())
}

fn config_block(g: &Global, rt: Option<&Runtime>, node_capacity: Option<usize>, cache: Option<usize>) -> Value {
    json!({
        "node_capacity": node_capacity,
        "workers": rt.map(Runtime::workers),
        "memory_units": g.memory_units,
        "cache_capacity": cache,
        "seed": g.seed,
    })
}

fn dataset_block(ds: &Dataset) -> Value {
    json!({ "n": ds.len(), "dim": ds.dim(), "metric": ds.metric() })
}

fn load_index(path: &Path) -> Result<GtsIndex> {
    let file = File::open(path).with_context(|| format!("opening snapshot {}", path.display()))?;
    read_snapshot(BufReader::new(file)).with_context(|| format!("reading snapshot {}", path.display()))
}

fn snapshot(index: &GtsIndex, path: &Path) -> Result<(usize, String)> {
    let mut bytes = Vec::new();
    write_snapshot(index, &mut bytes)?;
    fs::write(path, &bytes).with_context(|| format!("writing snapshot {}", path.display()))?;
    Ok((bytes.len(), format!("{:08x}", crc32fast::hash(&bytes))))
}

/// Workload payload format implied by what the index stores.
fn infer_format(ds: &Dataset) -> DatasetFormat {
    match ds.objects().first().map(|o| &o.payload) {
        Some(Payload::Text(_)) => DatasetFormat::Words,
        Some(Payload::Sequence(_)) => DatasetFormat::Sequences,
        _ => DatasetFormat::Vectors,
    }
}

fn read_workload(path: &Path, format: DatasetFormat) -> Result<Vec<workload::Line>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading workload {}", path.display()))?;
    workload::parse(&text, format).with_context(|| format!("parsing workload {}", path.display()))
}

fn build(g: &Global, rt: &Runtime, a: BuildArgs) -> Result<Status> {
    let t = Instant::now();
    let ds = load_dataset(&a.data.dataset, a.data.format, a.data.metric)
        .with_context(|| format!("loading dataset {}", a.data.dataset.display()))?;
    let load_s = t.elapsed().as_secs_f64();
    let data = dataset_block(&ds);

    let t = Instant::now();
    let index = GtsIndex::build(ds, IndexConfig::new(a.nc, g.seed), rt)?;
    let build_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (bytes, checksum) = snapshot(&index, &a.out)?;
    let write_s = t.elapsed().as_secs_f64();

    let nodes = index.nodes();
    emit(
        g,
        &json!({
            "command": "build",
            "dataset": data,
            "config": config_block(g, Some(rt), Some(a.nc), None),
            "index": {
                "nodes": nodes.len(),
                "levels": nodes.levels(),
                "split_rounds": nodes.split_rounds(),
                "leaves": nodes.leaves().len(),
            },
            "timings": { "load_seconds": load_s, "build_seconds": build_s, "write_seconds": write_s },
            "snapshot": { "path": a.out, "bytes": bytes, "checksum": checksum },
        }),
    )?;
    Ok(Status::Ok)
}

enum Query {
    Range(RangeQuery),
    Knn(KnnQuery),
}

impl Query {
    fn kind(&self) -> &'static str {
        match self {
            Query::Range(_) => "range",
            Query::Knn(_) => "knn",
        }
    }
}

#[derive(Clone, Default)]
struct Answer {
    neighbors: Vec<gts_core::query::Neighbor>,
    verified: usize,
    pruned: usize,
}

fn scatter(result: BatchResult, at: &[usize], out: &mut [Answer]) {
    for ((neighbors, stats), &q) in result.answers.into_iter().zip(result.stats).zip(at) {
        out[q] = Answer {
            neighbors,
            verified: stats.verified,
            pruned: stats.pruned_nodes,
        };
    }
}

fn query(g: &Global, rt: &Runtime, a: QueryArgs) -> Result<Status> {
    if a.batch_sizes.is_empty() || a.batch_sizes.contains(&0) {
        bail!("batch sizes must be positive");
    }
    let t = Instant::now();
    let index = load_index(&a.index)?;
    let load_s = t.elapsed().as_secs_f64();
    let ds = index.dataset();
    let format = a.format.unwrap_or_else(|| infer_format(ds));
    let lines = read_workload(&a.workload, format)?;

    let base = if a.radius.relative {
        Some(synth::radius_base(ds, a.radius.radius_base, a.radius.diameter_samples, g.seed)?)
    } else {
        None
    };
    let mut queries = Vec::with_capacity(lines.len());
    for l in lines {
        queries.push(match l.op {
            Op::Range { radius, payload } => {
                let radius = base.map_or(radius, |b| synth::relative_radius(radius, b));
                Query::Range(RangeQuery::new(payload, radius))
            }
            Op::Knn { k, payload } => Query::Knn(KnnQuery::new(payload, k)),
            _ => bail!("workload line {}: updates are not allowed in a query workload", l.line),
        });
    }

    let searcher = Searcher::new(&index, rt).with_options(SearchOptions { pruning: !a.no_pruning });
    let mut answers: Option<Vec<Answer>> = None;
    let mut rows = Vec::new();
    let mut peak = 0;
    for &size in &a.batch_sizes {
        let mut got = vec![Answer::default(); queries.len()];
        let mut batch_peak = 0;
        let t = Instant::now();
        for (c, chunk) in queries.chunks(size).enumerate() {
            let offset = c * size;
            let (mut ranges, mut range_at, mut knns, mut knn_at) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for (i, q) in chunk.iter().enumerate() {
                match q {
                    Query::Range(r) => {
                        ranges.push(r.clone());
                        range_at.push(offset + i);
                    }
                    Query::Knn(k) => {
                        knns.push(k.clone());
                        knn_at.push(offset + i);
                    }
                }
            }
            if !ranges.is_empty() {
                let mut budget = MemoryBudget::new(g.memory_units);
                let r = searcher.range(&ranges, &mut budget)?;
                batch_peak = batch_peak.max(r.peak_units);
                scatter(r, &range_at, &mut got);
            }
            if !knns.is_empty() {
                let mut budget = MemoryBudget::new(g.memory_units);
                let r = searcher.knn(&knns, &mut budget)?;
                batch_peak = batch_peak.max(r.peak_units);
                scatter(r, &knn_at, &mut got);
            }
        }
        let secs = t.elapsed().as_secs_f64();
        peak = peak.max(batch_peak);
        rows.push(json!({
            "batch_size": size,
            "batches": queries.len().div_ceil(size),
            "seconds": secs,
            "throughput_qps": if secs > 0.0 { queries.len() as f64 / secs } else { 0.0 },
            "peak_memory_units": batch_peak,
            "verified_total": got.iter().map(|x| x.verified).sum::<usize>(),
            "pruned_nodes_total": got.iter().map(|x| x.pruned).sum::<usize>(),
        }));
        answers.get_or_insert(got);
    }
    let answers = answers.unwrap_or_default();

    if !a.quiet {
        let stdout = io::stdout();
        let mut out = BufWriter::new(stdout.lock());
        for (i, (q, ans)) in queries.iter().zip(&answers).enumerate() {
            let line = json!({
                "query_index": i,
                "kind": q.kind(),
                "answers": ans.neighbors,
                "verified_count": ans.verified,
                "pruned_nodes": ans.pruned,
            });
            writeln!(out, "{line}")?;
        }
        out.flush()?;
    }

    let verification = a.oracle.then(|| {
        let mut v = Verification::new();
        let metric = ds.metric();
        let live: Vec<&DataObject> = index.live_objects().collect();
        for (i, (q, ans)) in queries.iter().zip(&answers).enumerate() {
            let ok = match q {
                Query::Range(r) => range_matches(metric, live.iter().copied(), &r.payload, r.radius, &ans.neighbors),
                Query::Knn(k) => knn_matches(metric, live.iter().copied(), &k.payload, k.k, &ans.neighbors),
            };
            v.record(i, ok);
        }
        v
    });
    let passed = verification.as_ref().is_none_or(Verification::passed);

    let n_range = queries.iter().filter(|q| matches!(q, Query::Range(_))).count();
    emit(
        g,
        &json!({
            "command": "query",
            "dataset": dataset_block(ds),
            "config": config_block(g, Some(rt), Some(index.node_capacity()), None),
            "pruning": !a.no_pruning,
            "radius_base": base.map(|b| json!({ "kind": a.radius.radius_base, "value": b })),
            "queries": { "total": queries.len(), "range": n_range, "knn": queries.len() - n_range },
            "timings": { "load_seconds": load_s },
            "batches": rows,
            "peak_memory_units": peak,
            "verification": verification,
        }),
    )?;
    Ok(if passed { Status::Ok } else { Status::VerificationFailed })
}

fn update(g: &Global, rt: &Runtime, a: UpdateArgs) -> Result<Status> {
    let index = load_index(&a.index)?;
    let format = a.format.unwrap_or_else(|| infer_format(index.dataset()));
    let lines = read_workload(&a.workload, format)?;
    let metric = index.dataset().metric();
    let node_capacity = index.node_capacity();

    let mut tracked: BTreeMap<u32, DataObject> = BTreeMap::new();
    if a.oracle {
        tracked.extend(index.live_objects().map(|o| (o.id, o.clone())));
    }
    let mut engine = UpdateEngine::new(index, a.cache_capacity, rt);
    let mut verification = a.oracle.then(Verification::new);

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let (mut inserts, mut deletes, mut queries) = (0usize, 0usize, 0usize);
    let (mut update_s, mut query_s) = (0.0, 0.0);
    let mut peak = 0;
    for l in lines {
        let at = || format!("workload line {}", l.line);
        match l.op {
            Op::Insert { id, payload } => {
                let obj = DataObject::new(id, payload);
                if a.oracle {
                    tracked.insert(id, obj.clone());
                }
                let t = Instant::now();
                engine.insert(obj).with_context(at)?;
                update_s += t.elapsed().as_secs_f64();
                inserts += 1;
            }
            Op::Delete { id } => {
                let t = Instant::now();
                engine.delete(id).with_context(at)?;
                update_s += t.elapsed().as_secs_f64();
                tracked.remove(&id);
                deletes += 1;
            }
            op @ (Op::Range { .. } | Op::Knn { .. }) => {
                let mut budget = MemoryBudget::new(g.memory_units);
                let t = Instant::now();
                let (kind, result, ok) = match &op {
                    Op::Range { radius, payload } => {
                        let q = RangeQuery::new(payload.clone(), *radius);
                        let r = engine.range(std::slice::from_ref(&q), &mut budget).with_context(at)?;
                        query_s += t.elapsed().as_secs_f64();
                        let ok = a.oracle
                            && range_matches(metric, tracked.values(), payload, *radius, &r.answers[0]);
                        ("range", r, ok)
                    }
                    Op::Knn { k, payload } => {
                        let q = KnnQuery::new(payload.clone(), *k);
                        let r = engine.knn(std::slice::from_ref(&q), &mut budget).with_context(at)?;
                        query_s += t.elapsed().as_secs_f64();
                        let ok = a.oracle && knn_matches(metric, tracked.values(), payload, *k, &r.answers[0]);
                        ("knn", r, ok)
                    }
                    _ => unreachable!(),
                };
                if let Some(v) = verification.as_mut() {
                    v.record(queries, ok);
                }
                peak = peak.max(result.peak_units);
                if !a.quiet {
                    let line = json!({
                        "query_index": queries,
                        "kind": kind,
                        "answers": result.answers[0],
                        "verified_count": result.stats[0].verified,
                        "pruned_nodes": result.stats[0].pruned_nodes,
                    });
                    writeln!(out, "{line}")?;
                }
                queries += 1;
            }
        }
    }
    out.flush()?;
    drop(out);

    let rebuilds = engine.rebuilds();
    let pending = engine.cache().len();
    let tombstones = engine.cache().tombstones().len();
    let snapshot_block = match &a.out {
        Some(path) => {
            if pending > 0 || tombstones > 0 {
                engine.flush_rebuild()?;
            }
            let (bytes, checksum) = snapshot(engine.index(), path)?;
            json!({ "path": path, "bytes": bytes, "checksum": checksum })
        }
        None => Value::Null,
    };
    let ops = inserts + deletes;
    let passed = verification.as_ref().is_none_or(Verification::passed);
    emit(
        g,
        &json!({
            "command": "update",
            "dataset": { "n": engine.len(), "metric": metric },
            "config": config_block(g, Some(rt), Some(node_capacity), Some(a.cache_capacity)),
            "operations": { "inserts": inserts, "deletes": deletes, "queries": queries },
            "rebuilds": rebuilds,
            "cache": { "pending": pending, "tombstones": tombstones },
            "timings": {
                "update_seconds": update_s,
                "mean_update_latency_us": if ops > 0 { update_s * 1e6 / ops as f64 } else { 0.0 },
                "query_seconds": query_s,
            },
            "peak_memory_units": peak,
            "snapshot": snapshot_block,
            "verification": verification,
        }),
    )?;
    Ok(if passed { Status::Ok } else { Status::VerificationFailed })
}

fn tune(g: &Global, a: TuneArgs) -> Result<Status> {
    let ds = load_dataset(&a.data.dataset, a.data.format, a.data.metric)
        .with_context(|| format!("loading dataset {}", a.data.dataset.display()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let sigma_sq = estimate_variance(&ds, a.sample_pairs, &mut rng)?;
    let (radius, base) = match a.radius {
        Some(r) => (r, None),
        None => {
            let b = synth::radius_base(&ds, a.radius_base, a.sample_pairs, g.seed)?;
            (synth::relative_radius(a.radius_units, b), Some(b))
        }
    };
    let rec = recommend_node_capacity(ds.len(), a.concurrency, sigma_sq, radius, &a.candidates)?;
    let table: Vec<Value> = rec
        .table
        .iter()
        .map(|&(nc, cost)| json!({ "node_capacity": nc, "levels": search_levels(ds.len(), nc), "cost": cost }))
        .collect();
    let report = json!({
        "command": "tune",
        "dataset": dataset_block(&ds),
        "config": config_block(g, None, None, None),
        "sigma_sq": sigma_sq,
        "radius": radius,
        "radius_base": base.map(|b| json!({ "kind": a.radius_base, "value": b })),
        "concurrency": a.concurrency,
        "table": table,
        "recommendation": { "node_capacity": rec.node_capacity },
    });
    if !g.json {
        println!("{:>8}  {:>6}  {:>14}", "Nc", "levels", "cost");
        for &(nc, cost) in &rec.table {
            println!("{nc:>8}  {:>6}  {cost:>14.4}", search_levels(ds.len(), nc));
        }
        println!("{}", json!({ "recommended_node_capacity": rec.node_capacity }));
    }
    if g.json || g.report.is_some() {
        emit(g, &report)?;
    }
    Ok(Status::Ok)
}

fn gen(g: &Global, a: GenArgs) -> Result<Status> {
    let total = a.n + if a.workload.is_some() { a.queries } else { 0 };
    let mut payloads = match a.distribution {
        Distribution::Uniform => synth::uniform_vectors(total, a.dim, g.seed),
        Distribution::Clustered => synth::clustered_vectors(total, a.dim, a.clusters, a.std_dev, g.seed)?,
    };
    let extra = payloads.split_off(a.n);
    let ds = Dataset::from_payloads(MetricKind::L2Norm, payloads)?;
    let mut file = BufWriter::new(File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?);
    DatasetFormat::Vectors.write(&mut file, &ds)?;
    file.flush()?;

    if let Some(path) = &a.workload {
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        for payload in extra {
            let op = match a.query_kind {
                QueryKind::Range => Op::Range { radius: a.radius, payload },
                QueryKind::Knn => Op::Knn { k: a.k, payload },
            };
            writeln!(w, "{}", workload::render(&op))?;
        }
        w.flush()?;
    }
    emit(
        g,
        &json!({
            "command": "gen",
            "distribution": format!("{:?}", a.distribution).to_lowercase(),
            "dataset": dataset_block(&ds),
            "config": config_block(g, None, None, None),
            "out": a.out,
            "workload": a.workload.as_ref().map(|p| json!({ "path": p, "queries": a.queries })),
        }),
    )?;
    Ok(Status::Ok)
}
