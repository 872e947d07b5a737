//! Bias-identity analysis over a gradient stream, exported as CSV.
//!
//! One row per (β, t) with both bias terms, the closed-form estimates, the
//! telescoping-identity residual, and a dominance flag. Any residual above
//! [`RESIDUAL_GATE`] fails the run — the gate is the machine-checkable form
//! of the identity.

use std::path::{Path, PathBuf};

use rsgdm_core::ema::bias_report;
use rsgdm_core::GradientStream;

use crate::error::{HarnessError, Result};

/// Upper bound on the telescoping-identity residual.
pub const RESIDUAL_GATE: f64 = 1e-10;

pub const BIAS_HEADER: &str =
    "beta,t,xi,zeta,m_closed,n_closed,identity_residual,abs_zeta_le_abs_xi";

#[derive(Debug, Clone)]
pub struct BiasOutcome {
    pub csv_path: PathBuf,
    pub rows: usize,
    pub max_residual: f64,
    pub gate_passed: bool,
}

/// Evaluate the grid and write the CSV; the caller turns a failed gate into
/// a nonzero exit.
pub fn analyze_bias(
    stream: &GradientStream,
    betas: &[f64],
    t_max: usize,
    csv_path: &Path,
) -> Result<BiasOutcome> {
    if betas.is_empty() {
        return Err(HarnessError::Usage("at least one beta is required".into()));
    }
    for &beta in betas {
        if !beta.is_finite() || !(0.0..1.0).contains(&beta) {
            return Err(HarnessError::Usage(format!(
                "beta must lie in [0, 1), got {beta}"
            )));
        }
    }
    if t_max < 2 || t_max > stream.len() {
        return Err(HarnessError::Usage(format!(
            "t_max must lie in [2, {}], got {t_max}",
            stream.len()
        )));
    }

    let mut csv = String::from(BIAS_HEADER);
    csv.push('\n');
    let mut rows = 0;
    let mut max_residual: f64 = 0.0;
    for &beta in betas {
        for r in bias_report(stream, beta, t_max)? {
            max_residual = max_residual.max(r.identity_residual);
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                beta,
                r.t,
                r.xi,
                r.zeta,
                r.m_closed,
                r.n_closed,
                r.identity_residual,
                r.zeta.abs() <= r.xi.abs(),
            ));
            rows += 1;
        }
    }

    if let Some(parent) = csv_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| HarnessError::io(format!("creating {}", parent.display()), e))?;
        }
    }
    std::fs::write(csv_path, csv)
        .map_err(|e| HarnessError::io(format!("writing {}", csv_path.display()), e))?;

    Ok(BiasOutcome {
        csv_path: csv_path.to_path_buf(),
        rows,
        max_residual,
        gate_passed: max_residual <= RESIDUAL_GATE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rsgdm_core::StreamKind;

    fn tmp(name: &str) -> PathBuf {
        std::env::temp_dir().join("rsgdm-bias-tests").join(name)
    }

    #[test]
    fn stationary_stream_rows_are_all_zero() {
        let stream = GradientStream::new(StreamKind::Constant { level: 2.0 }, 20).unwrap();
        let out = analyze_bias(&stream, &[0.9], 20, &tmp("stationary.csv")).unwrap();
        assert!(out.gate_passed);
        assert_eq!(out.rows, 19);
        let text = std::fs::read_to_string(&out.csv_path).unwrap();
        for line in text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields[2], "0"); // xi
            assert_eq!(fields[3], "0"); // zeta
            assert_eq!(fields[7], "true");
        }
    }

    #[test]
    fn linear_stream_hand_row() {
        let stream = GradientStream::new(
            StreamKind::LinearTrend {
                intercept: 0.0,
                slope: 1.0,
            },
            10,
        )
        .unwrap();
        let out = analyze_bias(&stream, &[0.9], 10, &tmp("linear.csv")).unwrap();
        assert!(out.gate_passed);
        let text = std::fs::read_to_string(&out.csv_path).unwrap();
        let row_t3: Vec<&str> = text
            .lines()
            .find(|l| l.starts_with("0.9,3,"))
            .unwrap()
            .split(',')
            .collect();
        assert!((row_t3[2].parse::<f64>().unwrap() - (-2.52)).abs() < 1e-12);
        assert!((row_t3[3].parse::<f64>().unwrap() - (-0.81)).abs() < 1e-12);
        assert!(row_t3[6].parse::<f64>().unwrap() <= 1e-12);
    }

    #[test]
    fn full_grid_passes_the_residual_gate() {
        let stream = GradientStream::new(
            StreamKind::NoisyTrend {
                intercept: 0.0,
                slope: 0.005,
                noise_scale: 0.5,
                seed: 5,
            },
            200,
        )
        .unwrap();
        let out = analyze_bias(&stream, &[0.0, 0.5, 0.9, 0.99], 200, &tmp("grid.csv")).unwrap();
        assert_eq!(out.rows, 4 * 199);
        assert!(out.gate_passed, "max residual {}", out.max_residual);
    }

    #[test]
    fn invalid_requests_are_usage_errors() {
        let stream = GradientStream::new(StreamKind::Constant { level: 1.0 }, 10).unwrap();
        assert_eq!(
            analyze_bias(&stream, &[], 10, &tmp("x.csv"))
                .unwrap_err()
                .exit_code(),
            1
        );
        assert_eq!(
            analyze_bias(&stream, &[1.5], 10, &tmp("x.csv"))
                .unwrap_err()
                .exit_code(),
            1
        );
        assert_eq!(
            analyze_bias(&stream, &[0.9], 11, &tmp("x.csv"))
                .unwrap_err()
                .exit_code(),
            1
        );
    }
}
