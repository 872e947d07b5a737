//! Central finite differences for verifying analytic gradients.
//!
//! The checks here only ever touch an objective through its scalar loss, so
//! they stay independent of whatever analytic gradient path they validate.

/// Default differencing step; balances truncation against rounding at f64.
pub const DEFAULT_STEP: f64 = 1e-6;

/// Central difference of `f` along coordinate `coord` at `x`.
pub fn central_difference<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], coord: usize, step: f64) -> f64 {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[coord] += step;
    xm[coord] -= step;
    (f(&xp) - f(&xm)) / (2.0 * step)
}

/// Scale-aware relative error; falls back to the absolute difference when
/// both values are vanishingly small.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-12 {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}
