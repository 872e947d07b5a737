//! Experiment orchestration for the momentum optimizers: config resolution,
//! deterministic training runs, optimizer comparisons, bias-identity
//! analysis, and plot-data emission. The `rsgdm` binary is a thin CLI over
//! these modules.

pub mod bias;
pub mod compare;
pub mod config;
pub mod error;
pub mod metrics;
pub mod plots;
pub mod runner;

pub use config::{resolve_config, ConfigOverrides, ExperimentConfig, Task};
pub use error::HarnessError;
