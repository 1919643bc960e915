mod commands;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gts_core::format::DatasetFormat;
use gts_core::metric::MetricKind;
use gts_core::synth::RadiusBase;

/// Batch similarity search over a flattened pivot tree.
#[derive(Parser, Debug)]
#[command(name = "gts", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Capacity of the search memory budget, in candidate rows.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub memory_units: usize,
    /// Print the report as one JSON line on stdout instead of pretty JSON on stderr.
    #[arg(long, global = true)]
    pub json: bool,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build an index from a dataset file and write a snapshot.
    Build(BuildArgs),
    /// Run a query workload against a snapshot.
    Query(QueryArgs),
    /// Run an insert/delete/query workload against a snapshot.
    Update(UpdateArgs),
    /// Estimate search cost per node capacity and recommend one.
    Tune(TuneArgs),
    /// Write a synthetic vector dataset, optionally with a query workload.
    Gen(GenArgs),
}

#[derive(Args, Debug)]
pub struct DataArgs {
    pub dataset: PathBuf,
    #[arg(long, value_parser = parse_format, default_value = "vectors")]
    pub format: DatasetFormat,
    /// edit, l1, l2 or angular.
    #[arg(long, value_parser = parse_metric, default_value = "l2")]
    pub metric: MetricKind,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Node capacity.
    #[arg(long, default_value_t = 20)]
    pub nc: usize,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RadiusArgs {
    /// Read range radii as units of 0.01% of the radius base.
    #[arg(long)]
    pub relative: bool,
    #[arg(long, value_parser = parse_radius_base, default_value = "diameter")]
    pub radius_base: RadiusBase,
    /// Pairs sampled when estimating the diameter.
    #[arg(long, default_value_t = 10_000)]
    pub diameter_samples: usize,
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    pub index: PathBuf,
    pub workload: PathBuf,
    /// Payload format of the workload; inferred from the index when omitted.
    #[arg(long, value_parser = parse_format)]
    pub format: Option<DatasetFormat>,
    #[arg(long, value_delimiter = ',', default_values_t = [16, 32, 64, 128, 256, 512])]
    pub batch_sizes: Vec<usize>,
    /// Check every answer against brute force; exit 2 on any mismatch.
    #[arg(long)]
    pub oracle: bool,
    /// Disable node and entry pruning.
    #[arg(long)]
    pub no_pruning: bool,
    /// Do not stream answers to stdout.
    #[arg(long)]
    pub quiet: bool,
    #[command(flatten)]
    pub radius: RadiusArgs,
}

#[derive(Args, Debug)]
pub struct UpdateArgs {
    pub index: PathBuf,
    pub workload: PathBuf,
    #[arg(long, value_parser = parse_format)]
    pub format: Option<DatasetFormat>,
    #[arg(long, default_value_t = gts_core::update::DEFAULT_CACHE_CAPACITY)]
    pub cache_capacity: usize,
    /// Check every query against a separately tracked object set.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub quiet: bool,
    /// Rebuild over the final object set and write it here.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TuneArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Search radius in units of 0.01% of the radius base.
    #[arg(long, default_value_t = 8.0)]
    pub radius_units: f64,
    /// Absolute radius; overrides --radius-units.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_parser = parse_radius_base, default_value = "diameter")]
    pub radius_base: RadiusBase,
    #[arg(long, value_delimiter = ',', default_values_t = gts_core::cost::CANDIDATE_CAPACITIES)]
    pub candidates: Vec<usize>,
    #[arg(long, default_value_t = gts_core::cost::DEFAULT_SAMPLE_PAIRS)]
    pub sample_pairs: usize,
    /// Modeled concurrency capacity.
    #[arg(long, default_value_t = 16_384)]
    pub concurrency: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Distribution {
    Uniform,
    Clustered,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum QueryKind {
    Range,
    Knn,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub distribution: Distribution,
    #[arg(long, short)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 20)]
    pub clusters: usize,
    #[arg(long, default_value_t = 0.05)]
    pub std_dev: f64,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also write a workload of queries drawn from the same distribution.
    #[arg(long)]
    pub workload: Option<PathBuf>,
    #[arg(long, default_value_t = 128)]
    pub queries: usize,
    #[arg(long, value_enum, default_value = "range")]
    pub query_kind: QueryKind,
    /// Radius written into range queries.
    #[arg(long, default_value_t = 8.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 8)]
    pub k: usize,
}

fn parse_format(s: &str) -> Result<DatasetFormat, String> {
    s.parse().map_err(|e: gts_core::Error| e.to_string())
}

fn parse_metric(s: &str) -> Result<MetricKind, String> {
    s.parse().map_err(|e: gts_core::Error| e.to_string())
}

fn parse_radius_base(s: &str) -> Result<RadiusBase, String> {
    s.parse().map_err(|e: gts_core::Error| e.to_string())
}

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Usage = 1,
    VerificationFailed = 2,
    Io = 3,
}

fn classify(err: &anyhow::Error) -> Status {
    let io = err.chain().any(|e| {
        e.downcast_ref::<std::io::Error>().is_some()
            || matches!(e.downcast_ref::<gts_core::Error>(), Some(gts_core::Error::Io(_)))
    });
    if io {
        Status::Io
    } else {
        Status::Usage
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::Usage as u8 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e) as u8)
        }
    }
}
