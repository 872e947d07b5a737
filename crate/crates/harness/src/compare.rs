//! Side-by-side optimizer comparison on a single task.
//!
//! Each optimizer runs with the identical task, seed, and schedule; only the
//! step rule differs. Rows land in `compare.csv` and in an aligned stdout
//! table with the same columns.

use std::path::PathBuf;

use rsgdm_core::OptimizerKind;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::runner::{run_experiment, RunSummary};

pub const COMPARE_HEADER: &str = "optimizer,final_train_loss,final_train_accuracy,\
final_valid_loss,final_valid_accuracy,best_valid_accuracy,best_epoch,total_steps";

#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub optimizer: OptimizerKind,
    pub final_train_loss: f64,
    pub final_train_accuracy: Option<f64>,
    pub final_valid_loss: f64,
    pub final_valid_accuracy: Option<f64>,
    pub best_valid_accuracy: Option<f64>,
    pub best_epoch: Option<usize>,
    pub total_steps: u64,
}

impl ComparisonRow {
    fn from_summary(s: &RunSummary) -> Self {
        ComparisonRow {
            optimizer: s.optimizer,
            final_train_loss: s.final_train_loss,
            final_train_accuracy: s.final_train_accuracy,
            final_valid_loss: s.final_valid_loss,
            final_valid_accuracy: s.final_valid_accuracy,
            best_valid_accuracy: s.best_valid_accuracy,
            best_epoch: s.best_epoch,
            total_steps: s.total_steps,
        }
    }

    fn cells(&self) -> Vec<String> {
        let opt_num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.optimizer.to_string(),
            self.final_train_loss.to_string(),
            opt_num(self.final_train_accuracy),
            self.final_valid_loss.to_string(),
            opt_num(self.final_valid_accuracy),
            opt_num(self.best_valid_accuracy),
            self.best_epoch.map(|e| e.to_string()).unwrap_or_default(),
            self.total_steps.to_string(),
        ]
    }

    pub fn csv_line(&self) -> String {
        self.cells().join(",")
    }
}

#[derive(Debug, Clone)]
pub struct CompareOutput {
    pub rows: Vec<ComparisonRow>,
    pub table_path: PathBuf,
    pub run_paths: Vec<PathBuf>,
    pub elapsed_ms: u128,
}

/// Run every optimizer under the identical config; needs at least two.
pub fn compare(base: &ExperimentConfig, optimizers: &[OptimizerKind]) -> Result<CompareOutput> {
    if optimizers.len() < 2 {
        return Err(HarnessError::Usage(
            "compare needs at least two optimizers".into(),
        ));
    }
    let mut rows = Vec::with_capacity(optimizers.len());
    let mut run_paths = Vec::with_capacity(optimizers.len());
    let mut elapsed_ms = 0;
    for &optimizer in optimizers {
        let mut config = base.clone();
        config.optimizer = optimizer;
        let out = run_experiment(&config)?;
        rows.push(ComparisonRow::from_summary(&out.summary));
        run_paths.push(out.metrics_path);
        elapsed_ms += out.elapsed_ms;
    }

    let table_path = base.output_dir.join("compare.csv");
    let mut csv = String::from(COMPARE_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.csv_line());
        csv.push('\n');
    }
    std::fs::write(&table_path, csv)
        .map_err(|e| HarnessError::io(format!("writing {}", table_path.display()), e))?;

    Ok(CompareOutput {
        rows,
        table_path,
        run_paths,
        elapsed_ms,
    })
}

/// Aligned text table; column captions match the CSV schema exactly.
pub fn render_table(rows: &[ComparisonRow]) -> String {
    let captions: Vec<&str> = COMPARE_HEADER.split(',').collect();
    let mut widths: Vec<usize> = captions.iter().map(|c| c.len()).collect();
    let cell_rows: Vec<Vec<String>> = rows.iter().map(ComparisonRow::cells).collect();
    for cells in &cell_rows {
        for (w, cell) in widths.iter_mut().zip(cells.iter()) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    for (i, caption) in captions.iter().enumerate() {
        out.push_str(&format!("{caption:<width$}  ", width = widths[i]));
    }
    out.push('\n');
    for cells in &cell_rows {
        for (i, cell) in cells.iter().enumerate() {
            out.push_str(&format!("{cell:<width$}  ", width = widths[i]));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve_config, ConfigOverrides, Task};

    fn config(dir: &str) -> ExperimentConfig {
        let mut cfg = resolve_config(ConfigOverrides {
            task: Some(Task::Constant),
            epochs: Some(2),
            weight_decay: Some(0.0),
            ..Default::default()
        })
        .unwrap();
        cfg.output_dir = std::env::temp_dir().join("rsgdm-compare-tests").join(dir);
        cfg
    }

    #[test]
    fn needs_at_least_two_optimizers() {
        let err = compare(&config("too-few"), &[OptimizerKind::Sgdm]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn constant_gradient_task_yields_identical_momentum_rows() {
        let out = compare(
            &config("const-eq"),
            &[OptimizerKind::Sgdm, OptimizerKind::Rsgdm],
        )
        .unwrap();
        assert_eq!(out.rows[0].final_train_loss, out.rows[1].final_train_loss);
        assert_eq!(out.rows[0].final_valid_loss, out.rows[1].final_valid_loss);
        assert_eq!(out.rows[0].total_steps, out.rows[1].total_steps);
    }

    #[test]
    fn both_momentum_rules_converge_on_the_quadratic_task() {
        let mut cfg = resolve_config(ConfigOverrides {
            task: Some(Task::Quadratic),
            ..Default::default()
        })
        .unwrap();
        cfg.output_dir = std::env::temp_dir()
            .join("rsgdm-compare-tests")
            .join("quad");
        let out = compare(&cfg, &[OptimizerKind::Sgdm, OptimizerKind::Rsgdm]).unwrap();
        let min = crate::runner::harness_quadratic().min_value();
        for row in &out.rows {
            assert!(
                (row.final_train_loss - min).abs() <= 1e-6,
                "{} stopped at {} (analytic minimum {min})",
                row.optimizer,
                row.final_train_loss
            );
            assert_eq!(row.total_steps, 10_000);
        }
    }

    #[test]
    fn table_captions_match_the_csv_schema() {
        let out = compare(&config("table"), &[OptimizerKind::Sgd, OptimizerKind::Sgdm]).unwrap();
        let table = render_table(&out.rows);
        let first_line = table.lines().next().unwrap();
        for caption in COMPARE_HEADER.split(',') {
            assert!(first_line.contains(caption), "missing caption {caption}");
        }
        let csv = std::fs::read_to_string(&out.table_path).unwrap();
        assert!(csv.starts_with(COMPARE_HEADER));
        assert_eq!(csv.lines().count(), 3);
    }
}
