//! Deterministic experiment runner.
//!
//! Per step: sample a batch, take the gradient, add weight decay, apply the
//! optimizer with the scheduled learning rate for the current epoch. One
//! train and one valid metrics row per epoch. Every output byte is a pure
//! function of (config, seed).

use std::path::PathBuf;
use std::time::Instant;

use rsgdm_core::mlp::{init_params, save_params, Activation, MlpObjective, MlpSpec};
use rsgdm_core::objectives::{
    make_synth_classification, shuffled_batches, LinearObjective, LogisticObjective, Objective,
    Quadratic, Rosenbrock,
};
use rsgdm_core::rng::{derive_seed, SplitMix64};
use rsgdm_core::{apply_weight_decay, Optimizer, OptimizerKind, ParamVector};

use crate::config::{ExperimentConfig, Task};
use crate::error::{HarnessError, Result};
use crate::metrics::{write_metrics_csv, MetricsRecord, Split};

/// Steps per "epoch" for tasks without a dataset (quadratic, rosenbrock,
/// constant), so the step-decay schedule still has epochs to act on.
pub const FULL_BATCH_STEPS_PER_EPOCH: usize = 50;

/// Defaults for the synthetic classification tasks.
pub const LOGREG_TRAIN_SAMPLES: usize = 2000;
pub const LOGREG_VALID_SAMPLES: usize = 500;
pub const LOGREG_FEATURES: usize = 20;
pub const LOGREG_MARGIN: f64 = 0.5;
pub const MLP_HIDDEN: usize = 16;

/// Row shape of a finished run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub config_hash: String,
    pub task: Task,
    pub optimizer: OptimizerKind,
    pub final_train_loss: f64,
    pub final_train_accuracy: Option<f64>,
    pub final_valid_loss: f64,
    pub final_valid_accuracy: Option<f64>,
    /// Highest valid accuracy seen; ties resolved to the latest epoch.
    pub best_valid_accuracy: Option<f64>,
    pub best_epoch: Option<usize>,
    pub total_steps: u64,
}

impl RunSummary {
    /// Rebuild the metric fields from per-epoch records.
    pub fn from_records(
        records: &[MetricsRecord],
        config_hash: String,
        task: Task,
        optimizer: OptimizerKind,
        total_steps: u64,
    ) -> Self {
        let last = |split: Split| records.iter().rev().find(|r| r.split == split);
        let final_train = last(Split::Train).expect("runs produce train rows");
        let final_valid = last(Split::Valid).expect("runs produce valid rows");

        let mut best_valid_accuracy = None;
        let mut best_epoch = None;
        for r in records.iter().filter(|r| r.split == Split::Valid) {
            if let Some(acc) = r.accuracy {
                if best_valid_accuracy.is_none_or(|b| acc >= b) {
                    best_valid_accuracy = Some(acc);
                    best_epoch = Some(r.epoch);
                }
            }
        }

        RunSummary {
            config_hash,
            task,
            optimizer,
            final_train_loss: final_train.loss,
            final_train_accuracy: final_train.accuracy,
            final_valid_loss: final_valid.loss,
            final_valid_accuracy: final_valid.accuracy,
            best_valid_accuracy,
            best_epoch,
            total_steps,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics_path: PathBuf,
    pub records: Vec<MetricsRecord>,
    pub summary: RunSummary,
    pub final_theta: ParamVector,
    /// Measured wall time; reported on stdout, never written to the CSV.
    pub elapsed_ms: u128,
}

struct TaskSetup {
    train: Box<dyn Objective>,
    valid: Option<Box<dyn Objective>>,
    theta0: ParamVector,
    mlp_spec: Option<MlpSpec>,
}

fn build_task(config: &ExperimentConfig) -> Result<TaskSetup> {
    match config.task {
        Task::Quadratic => {
            let quad = harness_quadratic();
            Ok(TaskSetup {
                theta0: ParamVector::zeros(quad.dim()),
                train: Box::new(quad),
                valid: None,
                mlp_spec: None,
            })
        }
        Task::Rosenbrock => Ok(TaskSetup {
            theta0: ParamVector::zeros(2),
            train: Box::new(Rosenbrock),
            valid: None,
            mlp_spec: None,
        }),
        Task::Constant => Ok(TaskSetup {
            theta0: ParamVector::zeros(4),
            train: Box::new(LinearObjective::seeded(4, derive_seed(config.seed, 0))),
            valid: None,
            mlp_spec: None,
        }),
        Task::Logreg => {
            let (train_data, valid_data) = synth_datasets(config.seed)?;
            Ok(TaskSetup {
                theta0: ParamVector::zeros(LOGREG_FEATURES + 1),
                train: Box::new(LogisticObjective::new(train_data)),
                valid: Some(Box::new(LogisticObjective::new(valid_data))),
                mlp_spec: None,
            })
        }
        Task::Mlp => {
            let (train_data, valid_data) = synth_datasets(config.seed)?;
            let spec = MlpSpec::new(vec![LOGREG_FEATURES, MLP_HIDDEN, 2], Activation::Tanh)?;
            let theta0 = init_params(&spec, derive_seed(config.seed, 4));
            Ok(TaskSetup {
                train: Box::new(MlpObjective::new(spec.clone(), &train_data)?),
                valid: Some(Box::new(MlpObjective::new(spec.clone(), &valid_data)?)),
                theta0,
                mlp_spec: Some(spec),
            })
        }
        Task::BiasAnalysis => Err(HarnessError::Usage(
            "bias-analysis is not a training task; use the analyze-bias subcommand".into(),
        )),
    }
}

/// The fixed quadratic bowl raced by the quadratic task.
pub fn harness_quadratic() -> Quadratic {
    Quadratic::new(
        vec![
            vec![2.0, 0.5, 0.0, 0.0],
            vec![0.5, 2.0, 0.5, 0.0],
            vec![0.0, 0.5, 2.0, 0.5],
            vec![0.0, 0.0, 0.5, 2.0],
        ],
        vec![1.0, -0.5, 2.0, 0.25],
    )
    .expect("fixture matrix is SPD")
}

fn synth_datasets(
    seed: u64,
) -> Result<(
    rsgdm_core::objectives::SynthClassificationData,
    rsgdm_core::objectives::SynthClassificationData,
)> {
    // one seeded draw, sliced into disjoint train/valid halves that share
    // the labelling hyperplane
    let all = make_synth_classification(
        LOGREG_TRAIN_SAMPLES + LOGREG_VALID_SAMPLES,
        LOGREG_FEATURES,
        LOGREG_MARGIN,
        derive_seed(seed, 1),
    )?;
    Ok(all.split_at(LOGREG_TRAIN_SAMPLES)?)
}

/// Run one experiment, write its metrics CSV, and summarize it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    let started = Instant::now();
    std::fs::create_dir_all(&config.output_dir).map_err(|e| {
        HarnessError::io(
            format!("creating output dir {}", config.output_dir.display()),
            e,
        )
    })?;

    let setup = build_task(config)?;
    let dim = setup.theta0.len();
    let mut optimizer =
        Optimizer::new(config.optimizer, dim, config.beta, config.schedule.alpha0())?;
    let mut theta = setup.theta0.clone();
    let mut batch_rng = SplitMix64::new(derive_seed(config.seed, 3));
    let num_samples = setup.train.num_samples();

    let mut records = Vec::with_capacity(config.epochs * 2);
    let mut step: u64 = 0;

    for epoch in 0..config.epochs {
        let lr = config.schedule.lr_at(epoch);
        optimizer.set_learning_rate(lr)?;

        let numeric = |what: String, step: u64| {
            HarnessError::Numeric(format!("{what} at step {step} (epoch {epoch})"))
        };

        match num_samples {
            Some(n) => {
                for batch in shuffled_batches(n, config.batch_size, &mut batch_rng) {
                    let grad = setup
                        .train
                        .batch_grad(&theta, &batch)
                        .map_err(|e| numeric(format!("gradient failed: {e}"), step + 1))?;
                    let grad = apply_weight_decay(&grad, &theta, &config.weight_decay)?;
                    theta = optimizer
                        .step(&theta, &grad)
                        .map_err(|e| numeric(format!("optimizer step failed: {e}"), step + 1))?;
                    step += 1;
                }
            }
            None => {
                for _ in 0..FULL_BATCH_STEPS_PER_EPOCH {
                    let grad = setup
                        .train
                        .grad(&theta)
                        .map_err(|e| numeric(format!("gradient failed: {e}"), step + 1))?;
                    let grad = apply_weight_decay(&grad, &theta, &config.weight_decay)?;
                    theta = optimizer
                        .step(&theta, &grad)
                        .map_err(|e| numeric(format!("optimizer step failed: {e}"), step + 1))?;
                    step += 1;
                }
            }
        }

        let train_loss = setup.train.eval(&theta)?;
        if !train_loss.is_finite() {
            return Err(numeric("non-finite training loss".into(), step));
        }
        let train_accuracy = setup.train.accuracy(&theta)?;
        let (valid_loss, valid_accuracy) = match &setup.valid {
            Some(v) => {
                let loss = v.eval(&theta)?;
                if !loss.is_finite() {
                    return Err(numeric("non-finite validation loss".into(), step));
                }
                (loss, v.accuracy(&theta)?)
            }
            None => (train_loss, train_accuracy),
        };

        records.push(MetricsRecord {
            epoch,
            split: Split::Train,
            loss: train_loss,
            accuracy: train_accuracy,
            lr,
            wall_ms: 0,
        });
        records.push(MetricsRecord {
            epoch,
            split: Split::Valid,
            loss: valid_loss,
            accuracy: valid_accuracy,
            lr,
            wall_ms: 0,
        });
    }

    let metrics_path = config
        .output_dir
        .join(format!("{}_{}_metrics.csv", config.task, config.optimizer));
    write_metrics_csv(&metrics_path, &records)?;

    if let Some(spec) = &setup.mlp_spec {
        let params_path = config.output_dir.join("mlp_params.bin");
        save_params(&params_path, spec, &theta)?;
    }

    let summary = RunSummary::from_records(
        &records,
        config.config_hash(),
        config.task,
        config.optimizer,
        step,
    );
    Ok(RunOutput {
        metrics_path,
        records,
        summary,
        final_theta: theta,
        elapsed_ms: started.elapsed().as_millis(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve_config, ConfigOverrides};
    use crate::metrics::parse_metrics_csv;

    fn small_config(task: Task, dir: &str) -> ExperimentConfig {
        let mut cfg = resolve_config(ConfigOverrides {
            task: Some(task),
            epochs: Some(3),
            ..Default::default()
        })
        .unwrap();
        cfg.output_dir = std::env::temp_dir().join("rsgdm-runner-tests").join(dir);
        cfg
    }

    #[test]
    fn identical_configs_produce_identical_bytes() {
        let cfg_a = small_config(Task::Logreg, "det-a");
        let cfg_b = small_config(Task::Logreg, "det-b");
        let a = run_experiment(&cfg_a).unwrap();
        let b = run_experiment(&cfg_b).unwrap();
        let bytes_a = std::fs::read(&a.metrics_path).unwrap();
        let bytes_b = std::fs::read(&b.metrics_path).unwrap();
        assert_eq!(bytes_a, bytes_b);
    }

    #[test]
    fn lr_column_follows_the_schedule() {
        let mut cfg = small_config(Task::Quadratic, "sched");
        cfg.epochs = 8;
        cfg.schedule = rsgdm_core::ScheduleSpec::new(0.04, 3, 0.5).unwrap();
        let out = run_experiment(&cfg).unwrap();
        for r in &out.records {
            assert_eq!(r.lr, cfg.schedule.lr_at(r.epoch));
        }
    }

    #[test]
    fn function_tasks_duplicate_train_metrics_into_valid_rows() {
        let out = run_experiment(&small_config(Task::Rosenbrock, "rosen")).unwrap();
        assert_eq!(out.records.len(), 6);
        for pair in out.records.chunks(2) {
            assert_eq!(pair[0].epoch, pair[1].epoch);
            assert_eq!(pair[0].loss, pair[1].loss);
            assert_eq!(pair[0].accuracy, None);
        }
    }

    #[test]
    fn summary_is_recomputable_from_the_csv() {
        let cfg = small_config(Task::Logreg, "summary");
        let out = run_experiment(&cfg).unwrap();
        let text = std::fs::read_to_string(&out.metrics_path).unwrap();
        let records = parse_metrics_csv(&text).unwrap();
        let rebuilt = RunSummary::from_records(
            &records,
            cfg.config_hash(),
            cfg.task,
            cfg.optimizer,
            out.summary.total_steps,
        );
        assert_eq!(rebuilt.final_train_loss, out.summary.final_train_loss);
        assert_eq!(rebuilt.final_valid_loss, out.summary.final_valid_loss);
        assert_eq!(rebuilt.best_valid_accuracy, out.summary.best_valid_accuracy);
        assert_eq!(rebuilt.best_epoch, out.summary.best_epoch);
    }

    #[test]
    fn best_valid_accuracy_ties_resolve_to_the_latest_epoch() {
        let mk = |epoch, split, acc| MetricsRecord {
            epoch,
            split,
            loss: 0.1,
            accuracy: Some(acc),
            lr: 0.01,
            wall_ms: 0,
        };
        let mut records = Vec::new();
        for (epoch, acc) in [(0, 0.9), (1, 0.95), (2, 0.95), (3, 0.8)] {
            records.push(mk(epoch, Split::Train, 1.0));
            records.push(mk(epoch, Split::Valid, acc));
        }
        let summary =
            RunSummary::from_records(&records, "h".into(), Task::Logreg, OptimizerKind::Sgdm, 4);
        assert_eq!(summary.best_valid_accuracy, Some(0.95));
        assert_eq!(summary.best_epoch, Some(2));
    }

    #[test]
    fn mlp_task_writes_a_loadable_parameter_file() {
        let cfg = small_config(Task::Mlp, "mlp-params");
        let out = run_experiment(&cfg).unwrap();
        let path = cfg.output_dir.join("mlp_params.bin");
        let (dims, params) = rsgdm_core::mlp::load_params(&path).unwrap();
        assert_eq!(dims, vec![LOGREG_FEATURES, MLP_HIDDEN, 2]);
        assert_eq!(params, out.final_theta);
    }

    #[test]
    fn bias_analysis_task_is_not_trainable() {
        let cfg = small_config(Task::BiasAnalysis, "bias");
        assert_eq!(run_experiment(&cfg).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn quadratic_reaches_the_analytic_minimum_with_defaults() {
        let mut cfg = small_config(Task::Quadratic, "quad-min");
        cfg.epochs = 200;
        let out = run_experiment(&cfg).unwrap();
        let min = harness_quadratic().min_value();
        assert!(
            (out.summary.final_train_loss - min).abs() <= 1e-6,
            "final loss {} vs analytic minimum {min}",
            out.summary.final_train_loss
        );
    }
}
