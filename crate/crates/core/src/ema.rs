//! Closed-form expansions and bias terms of the momentum EMAs.
//!
//! On a deterministic stream `g_1, g_2, …` the gradient EMA unrolls to the
//! geometric sum
//!
//! ```text
//! m_t = (1−β) · Σ_{i=1..t} β^{t−i} · g_i
//!     = (1−β^t)·g_t + (1−β)·ξ_t
//! ```
//!
//! where `ξ_t = Σ_{i=1..t−1} β^{t−i}·(g_i − g_t)` measures how much stale
//! history drags the estimate away from the current gradient. The
//! differential EMA likewise unrolls to
//!
//! ```text
//! z_t = (1−β) · Σ_{i=2..t} β^{t−i} · (g_i − g_{i−1})
//! ```
//!
//! and the corrected estimate `n_t = m_t + β·z_t` decomposes as
//! `(1−β^t)·g_t + (1−β)·ζ_t` with `ζ_t = Σ_{i=1..t−2} β^{t−i}·(g_{i+1} − g_t)`.
//!
//! The two bias terms are linked by an exact telescoping identity,
//!
//! ```text
//! ζ_t = β·ξ_t − β^t·(g_1 − g_t)
//! ```
//!
//! of which `ζ ≈ β·ξ` is the large-`t` limit. On streams whose history terms
//! `(g_i − g_t)` share one sign — monotone streams — it follows that
//! `|ζ_t| ≤ |ξ_t|`: the corrected estimate carries strictly less stale-history
//! bias. [`verify_identity`] checks the telescoped relation numerically;
//! everything here is an exact statement about deterministic streams, where
//! each element equals its own expectation.
//!
//! All functions take 1-based step indices and treat scalar streams; callers
//! map them over coordinates where needed.

use crate::error::{Error, Result};
use crate::stream::GradientStream;

fn check_range(stream: &GradientStream, t: usize) -> Result<()> {
    if t == 0 || t > stream.len() {
        return Err(Error::StepOutOfRange {
            t,
            len: stream.len(),
        });
    }
    Ok(())
}

/// `(1−β) · Σ_{i=1..t} β^{t−i} · g_i` — the unrolled gradient EMA.
pub fn ema_closed_form(stream: &GradientStream, beta: f64, t: usize) -> Result<f64> {
    check_range(stream, t)?;
    let mut acc = 0.0;
    let mut pow = 1.0;
    for i in (1..=t).rev() {
        acc += pow * stream.value_at(i)?;
        pow *= beta;
    }
    Ok((1.0 - beta) * acc)
}

/// Stale-history bias of the gradient EMA:
/// `ξ_t = Σ_{i=1..t−1} β^{t−i}·(g_i − g_t)`; zero at `t = 1`.
pub fn xi(stream: &GradientStream, beta: f64, t: usize) -> Result<f64> {
    check_range(stream, t)?;
    if t == 1 {
        return Ok(0.0);
    }
    let g_t = stream.value_at(t)?;
    let mut acc = 0.0;
    let mut pow = beta;
    for i in (1..=t - 1).rev() {
        acc += pow * (stream.value_at(i)? - g_t);
        pow *= beta;
    }
    Ok(acc)
}

/// Stale-history bias of the corrected estimate:
/// `ζ_t = Σ_{i=1..t−2} β^{t−i}·(g_{i+1} − g_t)`; zero for `t ≤ 2`.
pub fn zeta(stream: &GradientStream, beta: f64, t: usize) -> Result<f64> {
    check_range(stream, t)?;
    if t <= 2 {
        return Ok(0.0);
    }
    let g_t = stream.value_at(t)?;
    let mut acc = 0.0;
    let mut pow = beta * beta;
    for i in (1..=t - 2).rev() {
        acc += pow * (stream.value_at(i + 1)? - g_t);
        pow *= beta;
    }
    Ok(acc)
}

/// `(1−β) · Σ_{i=2..t} β^{t−i} · (g_i − g_{i−1})` — the unrolled
/// differential EMA, with the first differential defined as zero.
pub fn z_closed_form(stream: &GradientStream, beta: f64, t: usize) -> Result<f64> {
    check_range(stream, t)?;
    if t == 1 {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    let mut pow = 1.0;
    for i in (2..=t).rev() {
        acc += pow * (stream.value_at(i)? - stream.value_at(i - 1)?);
        pow *= beta;
    }
    Ok((1.0 - beta) * acc)
}

/// `(1−β^t)·g_t + (1−β)·ζ_t` — the corrected estimate split into its
/// current-gradient part and its bias contribution.
pub fn n_decomposition(stream: &GradientStream, beta: f64, t: usize) -> Result<f64> {
    check_range(stream, t)?;
    let g_t = stream.value_at(t)?;
    Ok((1.0 - beta.powi(t as i32)) * g_t + (1.0 - beta) * zeta(stream, beta, t)?)
}

/// Residual of the exact telescoping identity
/// `|ζ_t − (β·ξ_t − β^t·(g_1 − g_t))|`; zero up to rounding on every stream.
pub fn verify_identity(stream: &GradientStream, beta: f64, t: usize) -> Result<f64> {
    check_range(stream, t)?;
    let z = zeta(stream, beta, t)?;
    let x = xi(stream, beta, t)?;
    let g1 = stream.value_at(1)?;
    let g_t = stream.value_at(t)?;
    Ok((z - (beta * x - beta.powi(t as i32) * (g1 - g_t))).abs())
}

/// Per-step bias diagnostics over a stream prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub t: usize,
    pub xi: f64,
    pub zeta: f64,
    pub identity_residual: f64,
    pub m_closed: f64,
    pub n_closed: f64,
    /// `(1−β)·ξ`, the bias contribution inside the gradient EMA.
    pub sgdm_bias_contrib: f64,
    /// `(1−β)·ζ`, the bias contribution inside the corrected estimate.
    pub rsgdm_bias_contrib: f64,
}

/// One [`BiasReport`] per `t ∈ [2, t_max]`.
pub fn bias_report(stream: &GradientStream, beta: f64, t_max: usize) -> Result<Vec<BiasReport>> {
    check_range(stream, t_max)?;
    let mut out = Vec::new();
    for t in 2..=t_max {
        let x = xi(stream, beta, t)?;
        let z = zeta(stream, beta, t)?;
        out.push(BiasReport {
            t,
            xi: x,
            zeta: z,
            identity_residual: verify_identity(stream, beta, t)?,
            m_closed: ema_closed_form(stream, beta, t)?,
            n_closed: n_decomposition(stream, beta, t)?,
            sgdm_bias_contrib: (1.0 - beta) * x,
            rsgdm_bias_contrib: (1.0 - beta) * z,
        });
    }
    Ok(out)
}
