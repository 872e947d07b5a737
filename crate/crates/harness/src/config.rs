//! Experiment configuration: defaults, config-file parsing, CLI overrides.
//!
//! The config file format is flat `key = value` lines with `#` comments.
//! Every key has a CLI flag of the same name; flags override file values,
//! which override the built-in defaults. Unknown keys are errors.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rsgdm_core::{OptimizerKind, ScheduleSpec, WeightDecaySpec};

use crate::error::{HarnessError, Result};

/// What the run optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Quadratic,
    Rosenbrock,
    Logreg,
    Mlp,
    BiasAnalysis,
    /// Fixed-gradient plane; degenerate on purpose, used as an equivalence
    /// gate between the momentum rules.
    Constant,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Quadratic => "quadratic",
            Task::Rosenbrock => "rosenbrock",
            Task::Logreg => "logreg",
            Task::Mlp => "mlp",
            Task::BiasAnalysis => "bias-analysis",
            Task::Constant => "constant",
        })
    }
}

impl FromStr for Task {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(Task::Quadratic),
            "rosenbrock" => Ok(Task::Rosenbrock),
            "logreg" => Ok(Task::Logreg),
            "mlp" => Ok(Task::Mlp),
            "bias-analysis" => Ok(Task::BiasAnalysis),
            "constant" => Ok(Task::Constant),
            other => Err(HarnessError::Usage(format!(
                "unknown task {other:?} (expected quadratic, rosenbrock, logreg, mlp, \
                 bias-analysis, or constant)"
            ))),
        }
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub task: Task,
    pub optimizer: OptimizerKind,
    pub beta: f64,
    pub schedule: ScheduleSpec,
    pub weight_decay: WeightDecaySpec,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// The experiment-defining fields in a fixed order, one `key = value`
    /// per line. The output directory is not part of the experiment
    /// identity, so it is excluded.
    pub fn canonical_lines(&self) -> String {
        format!(
            "task = {}\noptimizer = {}\nbeta = {}\nalpha0 = {}\nlr_period = {}\n\
             lr_factor = {}\nweight_decay = {}\nbatch_size = {}\nepochs = {}\nseed = {}\n",
            self.task,
            self.optimizer,
            self.beta,
            self.schedule.alpha0(),
            self.schedule.period(),
            self.schedule.factor(),
            self.weight_decay.lambda(),
            self.batch_size,
            self.epochs,
            self.seed,
        )
    }

    /// FNV-1a hash of [`canonical_lines`](Self::canonical_lines), as hex.
    pub fn config_hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.canonical_lines().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

/// Partially specified settings; `None` means "not given here".
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub task: Option<Task>,
    pub optimizer: Option<OptimizerKind>,
    pub beta: Option<f64>,
    pub alpha0: Option<f64>,
    pub lr_period: Option<usize>,
    pub lr_factor: Option<f64>,
    pub weight_decay: Option<f64>,
    pub batch_size: Option<usize>,
    pub epochs: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl ConfigOverrides {
    /// Values present in `self` win over `base`.
    pub fn merged_over(self, base: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            task: self.task.or(base.task),
            optimizer: self.optimizer.or(base.optimizer),
            beta: self.beta.or(base.beta),
            alpha0: self.alpha0.or(base.alpha0),
            lr_period: self.lr_period.or(base.lr_period),
            lr_factor: self.lr_factor.or(base.lr_factor),
            weight_decay: self.weight_decay.or(base.weight_decay),
            batch_size: self.batch_size.or(base.batch_size),
            epochs: self.epochs.or(base.epochs),
            seed: self.seed.or(base.seed),
            output_dir: self.output_dir.or(base.output_dir),
        }
    }

    pub fn from_file(path: &Path) -> Result<ConfigOverrides> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::io(format!("reading config {}", path.display()), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<ConfigOverrides> {
        let mut out = ConfigOverrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Usage(format!(
                    "config line {} is not `key = value`: {raw:?}",
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| {
                HarnessError::Usage(format!(
                    "config line {}: invalid {what} value {value:?}",
                    lineno + 1
                ))
            };
            match key {
                "task" => out.task = Some(value.parse()?),
                "optimizer" => {
                    out.optimizer = Some(
                        value
                            .parse()
                            .map_err(|e: rsgdm_core::Error| HarnessError::Usage(e.to_string()))?,
                    )
                }
                "beta" => out.beta = Some(value.parse().map_err(|_| bad("beta"))?),
                "alpha0" => out.alpha0 = Some(value.parse().map_err(|_| bad("alpha0"))?),
                "lr_period" => out.lr_period = Some(value.parse().map_err(|_| bad("lr_period"))?),
                "lr_factor" => out.lr_factor = Some(value.parse().map_err(|_| bad("lr_factor"))?),
                "weight_decay" => {
                    out.weight_decay = Some(value.parse().map_err(|_| bad("weight_decay"))?)
                }
                "batch_size" => {
                    out.batch_size = Some(value.parse().map_err(|_| bad("batch_size"))?)
                }
                "epochs" => out.epochs = Some(value.parse().map_err(|_| bad("epochs"))?),
                "seed" => out.seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "output_dir" => out.output_dir = Some(PathBuf::from(value)),
                other => {
                    return Err(HarnessError::Usage(format!(
                        "unknown config key {other:?} on line {}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(out)
    }
}

/// Built-in defaults: β = 0.9, α₀ = 0.01, batch 128, λ = 5·10⁻⁴, learning
/// rate halved every 50 epochs, 200 epochs.
pub fn resolve_config(overrides: ConfigOverrides) -> Result<ExperimentConfig> {
    let task = overrides
        .task
        .ok_or_else(|| HarnessError::Usage("a task is required (--task or config file)".into()))?;
    let beta = overrides.beta.unwrap_or(0.9);
    if !beta.is_finite() || !(0.0..1.0).contains(&beta) {
        return Err(HarnessError::Usage(format!(
            "beta must lie in [0, 1), got {beta}"
        )));
    }
    let schedule = ScheduleSpec::new(
        overrides.alpha0.unwrap_or(0.01),
        overrides.lr_period.unwrap_or(50),
        overrides.lr_factor.unwrap_or(0.5),
    )?;
    let weight_decay = WeightDecaySpec::new(overrides.weight_decay.unwrap_or(5e-4))?;
    let batch_size = overrides.batch_size.unwrap_or(128);
    let epochs = overrides.epochs.unwrap_or(200);
    if batch_size == 0 {
        return Err(HarnessError::Usage("batch_size must be positive".into()));
    }
    if epochs == 0 {
        return Err(HarnessError::Usage("epochs must be positive".into()));
    }
    Ok(ExperimentConfig {
        task,
        optimizer: overrides.optimizer.unwrap_or(OptimizerKind::Sgdm),
        beta,
        schedule,
        weight_decay,
        batch_size,
        epochs,
        seed: overrides.seed.unwrap_or(42),
        output_dir: overrides
            .output_dir
            .unwrap_or_else(|| PathBuf::from("runs")),
    })
}
