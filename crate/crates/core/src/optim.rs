//! First-order optimizer step rules over flat parameter vectors.
//!
//! Three rules share one dampened-momentum core:
//!
//! - plain SGD:    `θ' = θ − α·g`
//! - SGDM:         `m' = β·m + (1−β)·g`, `θ' = θ − α·m'`
//! - RSGDM:        additionally tracks an EMA of the gradient differential
//!   `Δg = g − g_prev` as `z' = β·z + (1−β)·Δg` and updates with the
//!   corrected estimate `n = m' + β·z'`, i.e. `θ' = θ − α·n`.
//!
//! The differential of the very first step is defined to be zero (there is
//! no previous gradient), so `z` stays at zero until the second step. With a
//! constant gradient stream every differential vanishes and RSGDM reproduces
//! the SGDM trajectory exactly; with `β = 0` both reduce to plain SGD.
//!
//! RSGDM is configured by the same `(β, α)` pair as SGDM — no extra
//! hyperparameters. No bias-correction divisor is applied to either moment.
//!
//! States are plain values: cloning a state and replaying the same inputs
//! yields bitwise-identical outputs.

use crate::error::{Error, Result};
use crate::vector::ParamVector;

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() || !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidHyper {
            name: "beta",
            value: beta,
        });
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidHyper {
            name: "alpha",
            value: alpha,
        });
    }
    Ok(())
}

/// Plain gradient step: `θ − α·g`. Inputs are left unmodified.
pub fn sgd_step(theta: &ParamVector, grad: &ParamVector, alpha: f64) -> Result<ParamVector> {
    check_alpha(alpha)?;
    theta.check_same_shape(grad)?;
    ParamVector::new(
        theta
            .iter()
            .zip(grad.iter())
            .map(|(t, g)| t - alpha * g)
            .collect(),
    )
}

/// Momentum state: EMA of raw gradients plus a step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdmState {
    m: ParamVector,
    beta: f64,
    alpha: f64,
    t: u64,
}

impl SgdmState {
    /// Fresh state with a zero first-moment buffer.
    pub fn new(dim: usize, beta: f64, alpha: f64) -> Result<Self> {
        check_beta(beta)?;
        check_alpha(alpha)?;
        Ok(Self {
            m: ParamVector::zeros(dim),
            beta,
            alpha,
            t: 0,
        })
    }

    /// One update: `m' = β·m + (1−β)·g`, returns `θ − α·m'`.
    pub fn step(&mut self, theta: &ParamVector, grad: &ParamVector) -> Result<ParamVector> {
        self.m.check_same_shape(theta)?;
        theta.check_same_shape(grad)?;
        let m_new = ParamVector::new(
            self.m
                .iter()
                .zip(grad.iter())
                .map(|(m, g)| self.beta * m + (1.0 - self.beta) * g)
                .collect(),
        )?;
        let theta_new = ParamVector::new(
            theta
                .iter()
                .zip(m_new.iter())
                .map(|(t, m)| t - self.alpha * m)
                .collect(),
        )?;
        self.m = m_new;
        self.t += 1;
        Ok(theta_new)
    }

    pub fn first_moment(&self) -> &ParamVector {
        &self.m
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    pub fn set_learning_rate(&mut self, alpha: f64) -> Result<()> {
        check_alpha(alpha)?;
        self.alpha = alpha;
        Ok(())
    }
}

/// Differential-corrected momentum state.
///
/// Tracks the gradient EMA `m`, the differential EMA `z`, and the previous
/// raw gradient. Fully configured by the same `(β, α)` pair as [`SgdmState`].
#[derive(Debug, Clone, PartialEq)]
pub struct RsgdmState {
    m: ParamVector,
    z: ParamVector,
    g_prev: ParamVector,
    beta: f64,
    alpha: f64,
    t: u64,
}

impl RsgdmState {
    /// Fresh state; all buffers start at exact zero.
    pub fn new(dim: usize, beta: f64, alpha: f64) -> Result<Self> {
        check_beta(beta)?;
        check_alpha(alpha)?;
        Ok(Self {
            m: ParamVector::zeros(dim),
            z: ParamVector::zeros(dim),
            g_prev: ParamVector::zeros(dim),
            beta,
            alpha,
            t: 0,
        })
    }

    /// One update with the corrected estimate `n = m' + β·z'`.
    ///
    /// The first step uses a zero differential; afterwards `Δg = g − g_prev`.
    pub fn step(&mut self, theta: &ParamVector, grad: &ParamVector) -> Result<ParamVector> {
        self.m.check_same_shape(theta)?;
        theta.check_same_shape(grad)?;
        let first = self.t == 0;
        let dim = grad.len();

        let mut m_new = Vec::with_capacity(dim);
        let mut z_new = Vec::with_capacity(dim);
        let mut theta_new = Vec::with_capacity(dim);
        for i in 0..dim {
            let g = grad[i];
            let dg = if first { 0.0 } else { g - self.g_prev[i] };
            let m = self.beta * self.m[i] + (1.0 - self.beta) * g;
            let z = self.beta * self.z[i] + (1.0 - self.beta) * dg;
            let n = m + self.beta * z;
            m_new.push(m);
            z_new.push(z);
            theta_new.push(theta[i] - self.alpha * n);
        }

        let m_new = ParamVector::new(m_new)?;
        let z_new = ParamVector::new(z_new)?;
        let theta_new = ParamVector::new(theta_new)?;
        self.m = m_new;
        self.z = z_new;
        self.g_prev = grad.clone();
        self.t += 1;
        Ok(theta_new)
    }

    pub fn first_moment(&self) -> &ParamVector {
        &self.m
    }

    pub fn differential_moment(&self) -> &ParamVector {
        &self.z
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    pub fn set_learning_rate(&mut self, alpha: f64) -> Result<()> {
        check_alpha(alpha)?;
        self.alpha = alpha;
        Ok(())
    }
}

/// The three step rules, selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    Sgd,
    Sgdm,
    Rsgdm,
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Sgdm => "sgdm",
            OptimizerKind::Rsgdm => "rsgdm",
        })
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "sgdm" => Ok(OptimizerKind::Sgdm),
            "rsgdm" => Ok(OptimizerKind::Rsgdm),
            other => Err(Error::InvalidSpec(format!(
                "unknown optimizer {other:?} (expected sgd, sgdm, or rsgdm)"
            ))),
        }
    }
}

/// Uniform handle over the three step rules.
#[derive(Debug, Clone)]
pub enum Optimizer {
    Sgd { alpha: f64 },
    Sgdm(SgdmState),
    Rsgdm(RsgdmState),
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, dim: usize, beta: f64, alpha: f64) -> Result<Self> {
        match kind {
            OptimizerKind::Sgd => {
                check_alpha(alpha)?;
                Ok(Optimizer::Sgd { alpha })
            }
            OptimizerKind::Sgdm => Ok(Optimizer::Sgdm(SgdmState::new(dim, beta, alpha)?)),
            OptimizerKind::Rsgdm => Ok(Optimizer::Rsgdm(RsgdmState::new(dim, beta, alpha)?)),
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        match self {
            Optimizer::Sgd { .. } => OptimizerKind::Sgd,
            Optimizer::Sgdm(_) => OptimizerKind::Sgdm,
            Optimizer::Rsgdm(_) => OptimizerKind::Rsgdm,
        }
    }

    pub fn step(&mut self, theta: &ParamVector, grad: &ParamVector) -> Result<ParamVector> {
        match self {
            Optimizer::Sgd { alpha } => sgd_step(theta, grad, *alpha),
            Optimizer::Sgdm(state) => state.step(theta, grad),
            Optimizer::Rsgdm(state) => state.step(theta, grad),
        }
    }

    pub fn set_learning_rate(&mut self, alpha: f64) -> Result<()> {
        match self {
            Optimizer::Sgd { alpha: a } => {
                check_alpha(alpha)?;
                *a = alpha;
                Ok(())
            }
            Optimizer::Sgdm(state) => state.set_learning_rate(alpha),
            Optimizer::Rsgdm(state) => state.set_learning_rate(alpha),
        }
    }
}

/// Step-decay learning-rate schedule: `α(epoch) = α₀ · factor^⌊epoch / period⌋`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleSpec {
    alpha0: f64,
    period: usize,
    factor: f64,
}

impl ScheduleSpec {
    pub fn new(alpha0: f64, period: usize, factor: f64) -> Result<Self> {
        check_alpha(alpha0)?;
        if period == 0 {
            return Err(Error::InvalidHyper {
                name: "period",
                value: 0.0,
            });
        }
        if !factor.is_finite() || factor <= 0.0 || factor > 1.0 {
            return Err(Error::InvalidHyper {
                name: "factor",
                value: factor,
            });
        }
        Ok(Self {
            alpha0,
            period,
            factor,
        })
    }

    pub fn lr_at(&self, epoch: usize) -> f64 {
        self.alpha0 * self.factor.powi((epoch / self.period) as i32)
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }
}

/// Coupled L2 decay coefficient; `λ = 0` disables decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightDecaySpec {
    lambda: f64,
}

impl WeightDecaySpec {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidHyper {
                name: "lambda",
                value: lambda,
            });
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Returns `g + λ·θ`, the decayed gradient. Applied before the momentum
/// update so the decay flows through the moment buffers.
pub fn apply_weight_decay(
    grad: &ParamVector,
    theta: &ParamVector,
    spec: &WeightDecaySpec,
) -> Result<ParamVector> {
    grad.check_same_shape(theta)?;
    if spec.lambda == 0.0 {
        return Ok(grad.clone());
    }
    ParamVector::new(
        grad.iter()
            .zip(theta.iter())
            .map(|(g, t)| g + spec.lambda * t)
            .collect(),
    )
}
