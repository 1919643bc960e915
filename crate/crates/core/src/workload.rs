//! Line-oriented query and update workloads.
//!
//! ```text
//! R <radius> <payload>   range query
//! K <k> <payload>        kNN query
//! I <id> <payload>       insert
//! D <id>                 delete
//! ```
//!
//! Blank lines and lines starting with `#` are skipped. Payloads use the
//! dataset's text format.

use crate::error::{Error, Result};
use crate::format::DatasetFormat;
use crate::metric::Payload;
use crate::ObjectId;

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    Range { radius: f64, payload: Payload },
    Knn { k: usize, payload: Payload },
    Insert { id: ObjectId, payload: Payload },
    Delete { id: ObjectId },
}

impl Op {
    pub fn is_query(&self) -> bool {
        matches!(self, Op::Range { .. } | Op::Knn { .. })
    }
}

/// One parsed line with its 1-based line number.
#[derive(Clone, Debug, PartialEq)]
pub struct Line {
    pub line: usize,
    pub op: Op,
}

fn split_word(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], &s[i + 1..]),
        None => (s, ""),
    }
}

fn field<T: std::str::FromStr>(text: &str, what: &str, line: usize) -> Result<T> {
    text.parse().map_err(|_| Error::Format {
        line,
        message: format!("invalid {what} {text:?}"),
    })
}

pub fn parse_line(raw: &str, line: usize, format: DatasetFormat) -> Result<Option<Op>> {
    if raw.trim().is_empty() || raw.starts_with('#') {
        return Ok(None);
    }
    let (tag, rest) = split_word(raw);
    let (arg, payload) = split_word(rest);
    let op = match tag {
        "R" => {
            let radius: f64 = field(arg, "radius", line)?;
            if !(radius >= 0.0 && radius.is_finite()) {
                return Err(Error::Format {
                    line,
                    message: format!("radius must be finite and non-negative, got {arg}"),
                });
            }
            Op::Range {
                radius,
                payload: format.parse_payload(payload, line)?,
            }
        }
        "K" => Op::Knn {
            k: field(arg, "k", line)?,
            payload: format.parse_payload(payload, line)?,
        },
        "I" => Op::Insert {
            id: field(arg, "id", line)?,
            payload: format.parse_payload(payload, line)?,
        },
        "D" => {
            if !payload.trim().is_empty() {
                return Err(Error::Format {
                    line,
                    message: "delete takes only an id".into(),
                });
            }
            Op::Delete {
                id: field(arg, "id", line)?,
            }
        }
        other => {
            return Err(Error::Format {
                line,
                message: format!("unknown operation {other:?}"),
            })
        }
    };
    Ok(Some(op))
}

pub fn parse(contents: &str, format: DatasetFormat) -> Result<Vec<Line>> {
    let mut out = Vec::new();
    for (i, raw) in contents.lines().enumerate() {
        if let Some(op) = parse_line(raw, i + 1, format)? {
            out.push(Line { line: i + 1, op });
        }
    }
    Ok(out)
}

/// Writes `op` in the form [`parse_line`] reads.
pub fn render(op: &Op) -> String {
    match op {
        Op::Range { radius, payload } => format!("R {radius} {payload}"),
        Op::Knn { k, payload } => format!("K {k} {payload}"),
        Op::Insert { id, payload } => format!("I {id} {payload}"),
        Op::Delete { id } => format!("D {id}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_kind() {
        let text = "# header\nR 2.5 1 2\n\nK 8 0.5 0.5\nI 42 3 4\nD 7\n";
        let ops = parse(text, DatasetFormat::Vectors).unwrap();
        assert_eq!(ops.len(), 4);
        assert_eq!(ops[0].line, 2);
        assert_eq!(
            ops[0].op,
            Op::Range {
                radius: 2.5,
                payload: Payload::Vector(vec![1.0, 2.0])
            }
        );
        assert_eq!(ops[3].op, Op::Delete { id: 7 });
        for l in &ops {
            assert_eq!(parse_line(&render(&l.op), 1, DatasetFormat::Vectors).unwrap().unwrap(), l.op);
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse("K 3 kitten\nX 1 a\n", DatasetFormat::Words).unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }));
        let err = parse("R -1 cat\n", DatasetFormat::Words).unwrap_err();
        assert!(matches!(err, Error::Format { line: 1, .. }));
        assert!(parse("D 4 extra\n", DatasetFormat::Words).is_err());
    }
}
