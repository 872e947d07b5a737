//! Per-epoch training telemetry and its CSV form.
//!
//! The header is part of the interface, byte for byte. The `wall_ms` column
//! is pinned to zero so that metrics files are reproducible byte-for-byte
//! from (config, seed); measured timing goes to stdout instead.

use std::path::Path;

use crate::error::{HarnessError, Result};

pub const METRICS_HEADER: &str = "epoch,split,loss,accuracy,lr,wall_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Valid,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Valid => "valid",
        })
    }
}

impl std::str::FromStr for Split {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" => Ok(Split::Valid),
            other => Err(HarnessError::Usage(format!("unknown split {other:?}"))),
        }
    }
}

/// One row of telemetry; accuracy stays blank for regression-style tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub epoch: usize,
    pub split: Split,
    pub loss: f64,
    pub accuracy: Option<f64>,
    pub lr: f64,
    pub wall_ms: u64,
}

impl MetricsRecord {
    pub fn csv_line(&self) -> String {
        let accuracy = self.accuracy.map(|a| a.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.epoch, self.split, self.loss, accuracy, self.lr, self.wall_ms
        )
    }
}

pub fn render_metrics_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

pub fn write_metrics_csv(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    std::fs::write(path, render_metrics_csv(records))
        .map_err(|e| HarnessError::io(format!("writing {}", path.display()), e))
}

pub fn parse_metrics_csv(text: &str) -> Result<Vec<MetricsRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == METRICS_HEADER => {}
        other => {
            return Err(HarnessError::Usage(format!(
                "malformed metrics CSV: expected header {METRICS_HEADER:?}, got {other:?}"
            )))
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(HarnessError::Usage(format!(
                "malformed metrics CSV: row {} has {} fields",
                i + 2,
                fields.len()
            )));
        }
        let bad = |what: &str| {
            HarnessError::Usage(format!("malformed metrics CSV: row {} {what}", i + 2))
        };
        records.push(MetricsRecord {
            epoch: fields[0].parse().map_err(|_| bad("epoch"))?,
            split: fields[1].parse()?,
            loss: fields[2].parse().map_err(|_| bad("loss"))?,
            accuracy: if fields[3].is_empty() {
                None
            } else {
                Some(fields[3].parse().map_err(|_| bad("accuracy"))?)
            },
            lr: fields[4].parse().map_err(|_| bad("lr"))?,
            wall_ms: fields[5].parse().map_err(|_| bad("wall_ms"))?,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<MetricsRecord> {
        vec![
            MetricsRecord {
                epoch: 0,
                split: Split::Train,
                loss: std::f64::consts::LN_2,
                accuracy: Some(0.5),
                lr: 0.01,
                wall_ms: 0,
            },
            MetricsRecord {
                epoch: 0,
                split: Split::Valid,
                loss: 0.7,
                accuracy: None,
                lr: 0.01,
                wall_ms: 0,
            },
        ]
    }

    #[test]
    fn header_is_bit_exact() {
        let text = render_metrics_csv(&sample());
        assert!(text.starts_with("epoch,split,loss,accuracy,lr,wall_ms\n"));
    }

    #[test]
    fn blank_accuracy_round_trips() {
        let text = render_metrics_csv(&sample());
        assert!(text.contains("0,valid,0.7,,0.01,0"));
        let parsed = parse_metrics_csv(&text).unwrap();
        assert_eq!(parsed, sample());
    }

    #[test]
    fn f64_values_round_trip_exactly() {
        let records = sample();
        let parsed = parse_metrics_csv(&render_metrics_csv(&records)).unwrap();
        assert_eq!(parsed[0].loss.to_bits(), records[0].loss.to_bits());
    }

    #[test]
    fn bad_headers_and_rows_are_rejected() {
        assert!(parse_metrics_csv("epoch,loss\n").is_err());
        assert!(
            parse_metrics_csv("epoch,split,loss,accuracy,lr,wall_ms\n1,train,x,,0.01,0\n").is_err()
        );
        assert!(parse_metrics_csv("epoch,split,loss,accuracy,lr,wall_ms\n1,train,0.5\n").is_err());
    }
}
