//! Plain-text dataset formats.
//!
//! All formats are one object per line. An optional first line
//! `# dim=<D> n=<N>` is checked against the parsed contents.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Dataset, MetricKind, Payload};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetFormat {
    /// One UTF-8 token per line.
    Words,
    /// Whitespace-separated reals, uniform arity.
    Vectors,
    /// One symbol string per line over `{A, C, G, T, N}`.
    Sequences,
    /// Two reals per line.
    Locations,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "words" | "word" => Ok(Self::Words),
            "vectors" | "vector" => Ok(Self::Vectors),
            "sequences" | "sequence" | "dna" => Ok(Self::Sequences),
            "locations" | "location" => Ok(Self::Locations),
            other => Err(Error::Config(format!("unknown dataset format {other:?}"))),
        }
    }
}

impl DatasetFormat {
    /// Parses the payload part of one line.
    pub fn parse_payload(self, text: &str, line: usize) -> Result<Payload> {
        let err = |message: String| Error::Format { line, message };
        match self {
            DatasetFormat::Words => {
                let mut tokens = text.split_whitespace();
                let word = tokens.next().unwrap_or("");
                if tokens.next().is_some() {
                    return Err(err(format!("expected one token, got {text:?}")));
                }
                Ok(Payload::Text(word.to_string()))
            }
            DatasetFormat::Sequences => {
                let s = text.trim();
                if let Some(bad) = s.chars().find(|c| !matches!(c, 'A' | 'C' | 'G' | 'T' | 'N')) {
                    return Err(err(format!("symbol {bad:?} outside A,C,G,T,N")));
                }
                Ok(Payload::Sequence(s.as_bytes().to_vec()))
            }
            DatasetFormat::Vectors | DatasetFormat::Locations => {
                let values = text
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| err(format!("not a finite real: {t:?}")))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                if values.is_empty() {
                    return Err(err("empty vector".to_string()));
                }
                if self == DatasetFormat::Locations && values.len() != 2 {
                    return Err(err(format!("expected 2 coordinates, got {}", values.len())));
                }
                Ok(Payload::Vector(values))
            }
        }
    }

    pub fn parse(self, contents: &str, metric: MetricKind) -> Result<Dataset> {
        let mut header: Option<(usize, Option<usize>, Option<usize>)> = None;
        let mut payloads = Vec::new();
        let mut dim: Option<usize> = None;
        for (idx, raw) in contents.lines().enumerate() {
            let line = idx + 1;
            if idx == 0 && raw.starts_with('#') {
                header = Some((line, header_field(raw, "dim"), header_field(raw, "n")));
                continue;
            }
            if self != DatasetFormat::Words && raw.trim().is_empty() {
                return Err(Error::Format {
                    line,
                    message: "blank line".to_string(),
                });
            }
            let payload = self.parse_payload(raw, line)?;
            if let Some(d) = payload.dim() {
                match dim {
                    None => dim = Some(d),
                    Some(expected) if expected != d => {
                        return Err(Error::Format {
                            line,
                            message: format!("dimension {d} differs from {expected}"),
                        })
                    }
                    _ => {}
                }
            }
            payloads.push(payload);
        }
        if let Some((line, hdim, hn)) = header {
            if let (Some(hd), Some(d)) = (hdim, dim) {
                if hd != d {
                    return Err(Error::Format {
                        line,
                        message: format!("header dim={hd} but rows have dimension {d}"),
                    });
                }
            }
            if let Some(hn) = hn {
                if hn != payloads.len() {
                    return Err(Error::Format {
                        line,
                        message: format!("header n={hn} but file has {} rows", payloads.len()),
                    });
                }
            }
        }
        Dataset::from_payloads(metric, payloads)
    }

    pub fn write<W: Write>(self, out: &mut W, dataset: &Dataset) -> Result<()> {
        if let Some(d) = dataset.dim() {
            writeln!(out, "# dim={d} n={}", dataset.len())?;
        }
        for obj in dataset.objects() {
            writeln!(out, "{}", obj.payload)?;
        }
        Ok(())
    }
}

fn header_field(line: &str, key: &str) -> Option<usize> {
    line.trim_start_matches('#')
        .split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .find(|(k, _)| *k == key)
        .and_then(|(_, v)| v.parse().ok())
}

/// Reads a dataset file; ids are assigned `0..n` in file order.
pub fn load_dataset(path: impl AsRef<Path>, format: DatasetFormat, metric: MetricKind) -> Result<Dataset> {
    let contents = fs::read_to_string(path)?;
    format.parse(&contents, metric)
}
