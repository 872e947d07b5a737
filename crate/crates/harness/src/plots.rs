//! Split a metrics CSV into per-series plot files.
//!
//! One two-column `epoch<TAB>value` file per (split, metric) series, named
//! `<stem>.<split>.<metric>.tsv`. Values are copied verbatim from the CSV,
//! so re-reading a series reproduces the source exactly. Series with no
//! values (blank accuracy on regression tasks) are skipped.

use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::metrics::METRICS_HEADER;

pub fn emit_plot_data(metrics_csv: &Path, out_dir: Option<&Path>) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(metrics_csv)
        .map_err(|e| HarnessError::io(format!("reading {}", metrics_csv.display()), e))?;

    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == METRICS_HEADER => {}
        other => {
            return Err(HarnessError::Usage(format!(
                "malformed metrics CSV {}: expected header {METRICS_HEADER:?}, got {other:?}",
                metrics_csv.display()
            )))
        }
    }

    // series keyed by (split, metric), in a fixed emit order
    let splits = ["train", "valid"];
    let metrics = ["loss", "accuracy"];
    let mut series: Vec<Vec<(String, String)>> = vec![Vec::new(); 4];
    let index = |split: &str, metric: usize| -> Option<usize> {
        splits
            .iter()
            .position(|s| *s == split)
            .map(|p| p * 2 + metric)
    };

    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(HarnessError::Usage(format!(
                "malformed metrics CSV: row {} has {} fields",
                i + 2,
                fields.len()
            )));
        }
        let epoch: usize = fields[0].parse().map_err(|_| {
            HarnessError::Usage(format!("malformed metrics CSV: row {} epoch", i + 2))
        })?;
        let slot = index(fields[1], 0).ok_or_else(|| {
            HarnessError::Usage(format!(
                "malformed metrics CSV: row {} unknown split {:?}",
                i + 2,
                fields[1]
            ))
        })?;
        series[slot].push((epoch.to_string(), fields[2].to_string()));
        if !fields[3].is_empty() {
            series[slot + 1].push((epoch.to_string(), fields[3].to_string()));
        }
    }

    // epochs must be strictly increasing within every series
    for points in &series {
        let mut prev: Option<usize> = None;
        for (epoch, _) in points {
            let e: usize = epoch.parse().expect("validated above");
            if prev.is_some_and(|p| e <= p) {
                return Err(HarnessError::Usage(
                    "malformed metrics CSV: epochs are not strictly increasing".into(),
                ));
            }
            prev = Some(e);
        }
    }

    let stem = metrics_csv
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| {
            HarnessError::Usage(format!(
                "cannot derive a stem from {}",
                metrics_csv.display()
            ))
        })?;
    let dir = match out_dir {
        Some(d) => d.to_path_buf(),
        None => metrics_csv.parent().unwrap_or(Path::new(".")).to_path_buf(),
    };
    std::fs::create_dir_all(&dir)
        .map_err(|e| HarnessError::io(format!("creating {}", dir.display()), e))?;

    let mut written = Vec::new();
    for (slot, points) in series.iter().enumerate() {
        if points.is_empty() {
            continue;
        }
        let split = splits[slot / 2];
        let metric = metrics[slot % 2];
        let path = dir.join(format!("{stem}.{split}.{metric}.tsv"));
        let mut body = String::new();
        for (epoch, value) in points {
            body.push_str(epoch);
            body.push('\t');
            body.push_str(value);
            body.push('\n');
        }
        std::fs::write(&path, body)
            .map_err(|e| HarnessError::io(format!("writing {}", path.display()), e))?;
        written.push(path);
    }
    Ok(written)
}
