//! Optimization targets with exact gradient oracles.
//!
//! Deterministic surfaces (quadratic bowls, Rosenbrock, a constant-gradient
//! plane) plus seeded synthetic linear classification with mini-batch
//! logistic gradients. Objectives are immutable after construction and all
//! evaluation is pure, so they can be shared across threads freely.

use std::io::Write;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::vector::ParamVector;

/// An evaluatable loss with a gradient oracle.
pub trait Objective {
    fn dim(&self) -> usize;

    /// Full loss at `theta` (all samples for data-backed objectives).
    fn eval(&self, theta: &ParamVector) -> Result<f64>;

    /// Full gradient at `theta`.
    fn grad(&self, theta: &ParamVector) -> Result<ParamVector>;

    /// Gradient over a subset of samples; analytic objectives ignore the
    /// selector and return the full gradient.
    fn batch_grad(&self, theta: &ParamVector, batch: &[usize]) -> Result<ParamVector> {
        let _ = batch;
        self.grad(theta)
    }

    /// Number of samples backing the objective, if any.
    fn num_samples(&self) -> Option<usize> {
        None
    }

    /// Classification accuracy in [0, 1], if the objective defines one.
    fn accuracy(&self, theta: &ParamVector) -> Result<Option<f64>> {
        let _ = theta;
        Ok(None)
    }

    /// Known optimum as (minimizer, minimal loss), when available.
    fn optimum(&self) -> Option<(ParamVector, f64)> {
        None
    }
}

// ── Quadratic bowl ──────────────────────────────────────────────────

/// `f(θ) = ½·θᵀAθ − bᵀθ` with symmetric positive-definite `A`.
///
/// The minimizer solves `Aθ = b`; positive definiteness is established by a
/// Cholesky factorization at construction, which also serves the solve.
#[derive(Debug, Clone)]
pub struct Quadratic {
    dim: usize,
    a: Vec<f64>, // row-major dim×dim
    b: Vec<f64>,
    chol: Vec<f64>, // lower triangular factor, row-major
}

impl Quadratic {
    pub fn new(rows: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || b.len() != dim {
            return Err(Error::ShapeMismatch {
                expected: dim.max(1),
                actual: b.len(),
            });
        }
        let mut a = Vec::with_capacity(dim * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(Error::ShapeMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            a.extend_from_slice(row);
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "quadratic coefficients",
            });
        }
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..dim {
            for j in 0..i {
                if (a[i * dim + j] - a[j * dim + i]).abs() > 1e-12 * scale {
                    return Err(Error::NotSpd);
                }
            }
        }
        let chol = cholesky(&a, dim)?;
        Ok(Self { dim, a, b, chol })
    }

    /// Solution of `Aθ = b`, i.e. the unique minimizer.
    pub fn minimizer(&self) -> ParamVector {
        let x = cholesky_solve(&self.chol, self.dim, &self.b);
        ParamVector::new(x).expect("solve of finite SPD system is finite")
    }

    /// Loss at the minimizer.
    pub fn min_value(&self) -> f64 {
        self.eval(&self.minimizer())
            .expect("minimizer has matching shape")
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, theta: &ParamVector) -> Result<f64> {
        if theta.len() != self.dim {
            return Err(Error::ShapeMismatch {
                expected: self.dim,
                actual: theta.len(),
            });
        }
        let t = theta.as_slice();
        let mut quad = 0.0;
        let mut lin = 0.0;
        for i in 0..self.dim {
            let row = &self.a[i * self.dim..(i + 1) * self.dim];
            let at: f64 = row.iter().zip(t.iter()).map(|(a, x)| a * x).sum();
            quad += t[i] * at;
            lin += self.b[i] * t[i];
        }
        Ok(0.5 * quad - lin)
    }

    fn grad(&self, theta: &ParamVector) -> Result<ParamVector> {
        if theta.len() != self.dim {
            return Err(Error::ShapeMismatch {
                expected: self.dim,
                actual: theta.len(),
            });
        }
        let t = theta.as_slice();
        let mut g = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let row = &self.a[i * self.dim..(i + 1) * self.dim];
            let at: f64 = row.iter().zip(t.iter()).map(|(a, x)| a * x).sum();
            g.push(at - self.b[i]);
        }
        ParamVector::new(g)
    }

    fn optimum(&self) -> Option<(ParamVector, f64)> {
        let m = self.minimizer();
        let v = self.min_value();
        Some((m, v))
    }
}

fn cholesky(a: &[f64], dim: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; dim * dim];
    for j in 0..dim {
        let mut diag = a[j * dim + j];
        for k in 0..j {
            diag -= l[j * dim + k] * l[j * dim + k];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(Error::NotSpd);
        }
        let ljj = diag.sqrt();
        l[j * dim + j] = ljj;
        for i in j + 1..dim {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            l[i * dim + j] = s / ljj;
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &[f64], dim: usize, b: &[f64]) -> Vec<f64> {
    // forward substitution L y = b
    let mut y = vec![0.0; dim];
    for i in 0..dim {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * dim + k] * y[k];
        }
        y[i] = s / l[i * dim + i];
    }
    // back substitution Lᵀ x = y
    let mut x = vec![0.0; dim];
    for i in (0..dim).rev() {
        let mut s = y[i];
        for k in i + 1..dim {
            s -= l[k * dim + i] * x[k];
        }
        x[i] = s / l[i * dim + i];
    }
    x
}

// ── Rosenbrock ──────────────────────────────────────────────────────

/// `f(x, y) = (1−x)² + 100·(y−x²)²`; global minimum 0 at (1, 1).
pub fn rosenbrock_eval(theta: &ParamVector) -> Result<f64> {
    if theta.len() != 2 {
        return Err(Error::ShapeMismatch {
            expected: 2,
            actual: theta.len(),
        });
    }
    let (x, y) = (theta[0], theta[1]);
    Ok((1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2))
}

pub fn rosenbrock_grad(theta: &ParamVector) -> Result<ParamVector> {
    if theta.len() != 2 {
        return Err(Error::ShapeMismatch {
            expected: 2,
            actual: theta.len(),
        });
    }
    let (x, y) = (theta[0], theta[1]);
    let dx = -2.0 * (1.0 - x) - 400.0 * x * (y - x * x);
    let dy = 200.0 * (y - x * x);
    ParamVector::new(vec![dx, dy])
}

/// The 2-d valley as an [`Objective`].
#[derive(Debug, Clone, Default)]
pub struct Rosenbrock;

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, theta: &ParamVector) -> Result<f64> {
        rosenbrock_eval(theta)
    }

    fn grad(&self, theta: &ParamVector) -> Result<ParamVector> {
        rosenbrock_grad(theta)
    }

    fn optimum(&self) -> Option<(ParamVector, f64)> {
        Some((ParamVector::new(vec![1.0, 1.0]).unwrap(), 0.0))
    }
}

// ── Constant-gradient plane ─────────────────────────────────────────

/// `f(θ) = gᵀθ` for a fixed `g`: the gradient is the same at every point.
///
/// Degenerate on purpose — a constant gradient stream makes the momentum
/// and differential-corrected rules coincide, which the harness uses as an
/// equivalence gate.
#[derive(Debug, Clone)]
pub struct LinearObjective {
    gradient: ParamVector,
}

impl LinearObjective {
    pub fn new(gradient: ParamVector) -> Self {
        Self { gradient }
    }

    /// Seeded plane with components uniform in [-1, 1).
    pub fn seeded(dim: usize, seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let g: Vec<f64> = (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
        Self {
            gradient: ParamVector::new(g).expect("uniform draws are finite"),
        }
    }
}

impl Objective for LinearObjective {
    fn dim(&self) -> usize {
        self.gradient.len()
    }

    fn eval(&self, theta: &ParamVector) -> Result<f64> {
        theta.check_same_shape(&self.gradient)?;
        Ok(theta
            .iter()
            .zip(self.gradient.iter())
            .map(|(t, g)| t * g)
            .sum())
    }

    fn grad(&self, theta: &ParamVector) -> Result<ParamVector> {
        theta.check_same_shape(&self.gradient)?;
        Ok(self.gradient.clone())
    }
}

// ── Synthetic linear classification ─────────────────────────────────

/// Seeded, linearly separable binary classification data.
///
/// Points are drawn uniformly in [-1, 1)^d, labelled by the sign of their
/// projection onto a random unit normal, then pushed `margin` away from the
/// separating hyperplane along that normal. The constructing normal (with
/// zero offset) therefore classifies every sample correctly.
#[derive(Debug, Clone)]
pub struct SynthClassificationData {
    n: usize,
    d: usize,
    features: Vec<f64>, // n×d row-major
    labels: Vec<u8>,
    separator: Vec<f64>, // unit normal used in construction
    seed: u64,
    margin: f64,
}

pub fn make_synth_classification(
    n: usize,
    d: usize,
    margin: f64,
    seed: u64,
) -> Result<SynthClassificationData> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidSpec(
            "sample count and feature dim must be positive".into(),
        ));
    }
    if !margin.is_finite() || margin <= 0.0 {
        return Err(Error::InvalidHyper {
            name: "margin",
            value: margin,
        });
    }
    let mut rng = SplitMix64::new(seed);

    let mut normal: Vec<f64> = (0..d).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
    debug_assert!(norm > 0.0);
    for v in &mut normal {
        *v /= norm;
    }

    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let row_start = features.len();
        for _ in 0..d {
            features.push(rng.uniform(-1.0, 1.0));
        }
        let raw: f64 = features[row_start..]
            .iter()
            .zip(normal.iter())
            .map(|(x, w)| x * w)
            .sum();
        let positive = raw >= 0.0;
        let push = if positive { margin } else { -margin };
        for (j, w) in normal.iter().enumerate() {
            features[row_start + j] += push * w;
        }
        labels.push(positive as u8);
    }

    Ok(SynthClassificationData {
        n,
        d,
        features,
        labels,
        separator: normal,
        seed,
        margin,
    })
}

impl SynthClassificationData {
    pub fn num_samples(&self) -> usize {
        self.n
    }

    pub fn feature_dim(&self) -> usize {
        self.d
    }

    pub fn sample(&self, index: usize) -> &[f64] {
        &self.features[index * self.d..(index + 1) * self.d]
    }

    pub fn label(&self, index: usize) -> u8 {
        self.labels[index]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Unit normal of the constructing hyperplane (decision threshold 0).
    pub fn separator(&self) -> &[f64] {
        &self.separator
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Split into a head of `n_head` samples and the remaining tail.
    ///
    /// Both halves keep the constructing hyperplane, so a disjoint
    /// validation set drawn this way tests the same concept the training
    /// half was labelled with.
    pub fn split_at(self, n_head: usize) -> Result<(Self, Self)> {
        if n_head == 0 || n_head >= self.n {
            return Err(Error::InvalidSpec(format!(
                "split point {n_head} must fall inside 1..{}",
                self.n
            )));
        }
        let tail = SynthClassificationData {
            n: self.n - n_head,
            d: self.d,
            features: self.features[n_head * self.d..].to_vec(),
            labels: self.labels[n_head..].to_vec(),
            separator: self.separator.clone(),
            seed: self.seed,
            margin: self.margin,
        };
        let head = SynthClassificationData {
            n: n_head,
            d: self.d,
            features: self.features[..n_head * self.d].to_vec(),
            labels: self.labels[..n_head].to_vec(),
            ..self
        };
        Ok((head, tail))
    }

    /// Export as CSV: feature columns `f0..f{d-1}`, then `label`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for j in 0..self.d {
            write!(w, "f{j},")?;
        }
        writeln!(w, "label")?;
        for i in 0..self.n {
            for x in self.sample(i) {
                write!(w, "{x},")?;
            }
            writeln!(w, "{}", self.labels[i])?;
        }
        Ok(())
    }
}

// ── Logistic regression over the synthetic data ─────────────────────

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn check_logistic_theta(data: &SynthClassificationData, theta: &ParamVector) -> Result<()> {
    if theta.len() != data.d + 1 {
        return Err(Error::ShapeMismatch {
            expected: data.d + 1,
            actual: theta.len(),
        });
    }
    Ok(())
}

fn check_batch(data: &SynthClassificationData, batch: &[usize]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::InvalidSpec("empty batch".into()));
    }
    for &i in batch {
        if i >= data.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: data.n,
            });
        }
    }
    Ok(())
}

fn logit(data: &SynthClassificationData, theta: &ParamVector, i: usize) -> f64 {
    let t = theta.as_slice();
    let bias = t[data.d];
    data.sample(i)
        .iter()
        .zip(t.iter())
        .map(|(x, w)| x * w)
        .sum::<f64>()
        + bias
}

/// Exact gradient of mean binary cross-entropy over `batch`.
///
/// `theta` holds `d` weights followed by one bias term.
pub fn logistic_minibatch_grad(
    data: &SynthClassificationData,
    theta: &ParamVector,
    batch: &[usize],
) -> Result<ParamVector> {
    check_logistic_theta(data, theta)?;
    check_batch(data, batch)?;
    let mut g = vec![0.0; data.d + 1];
    for &i in batch {
        let err = sigmoid(logit(data, theta, i)) - data.labels[i] as f64;
        for (j, x) in data.sample(i).iter().enumerate() {
            g[j] += err * x;
        }
        g[data.d] += err;
    }
    let inv = 1.0 / batch.len() as f64;
    for v in &mut g {
        *v *= inv;
    }
    ParamVector::new(g)
}

/// Mean binary cross-entropy over `batch`.
pub fn logistic_loss(
    data: &SynthClassificationData,
    theta: &ParamVector,
    batch: &[usize],
) -> Result<f64> {
    check_logistic_theta(data, theta)?;
    check_batch(data, batch)?;
    let mut loss = 0.0;
    for &i in batch {
        let z = logit(data, theta, i);
        loss += if data.labels[i] == 1 {
            log1p_exp(-z)
        } else {
            log1p_exp(z)
        };
    }
    Ok(loss / batch.len() as f64)
}

/// Fraction of samples where `σ(z) ≥ ½` agrees with the label.
pub fn logistic_accuracy(data: &SynthClassificationData, theta: &ParamVector) -> Result<f64> {
    check_logistic_theta(data, theta)?;
    let hits = (0..data.n)
        .filter(|&i| (logit(data, theta, i) >= 0.0) as u8 == data.labels[i])
        .count();
    Ok(hits as f64 / data.n as f64)
}

/// Logistic regression (weights + bias) over a synthetic dataset.
#[derive(Debug, Clone)]
pub struct LogisticObjective {
    data: SynthClassificationData,
    all: Vec<usize>,
}

impl LogisticObjective {
    pub fn new(data: SynthClassificationData) -> Self {
        let all = (0..data.num_samples()).collect();
        Self { data, all }
    }

    pub fn data(&self) -> &SynthClassificationData {
        &self.data
    }
}

impl Objective for LogisticObjective {
    fn dim(&self) -> usize {
        self.data.feature_dim() + 1
    }

    fn eval(&self, theta: &ParamVector) -> Result<f64> {
        logistic_loss(&self.data, theta, &self.all)
    }

    fn grad(&self, theta: &ParamVector) -> Result<ParamVector> {
        logistic_minibatch_grad(&self.data, theta, &self.all)
    }

    fn batch_grad(&self, theta: &ParamVector, batch: &[usize]) -> Result<ParamVector> {
        logistic_minibatch_grad(&self.data, theta, batch)
    }

    fn num_samples(&self) -> Option<usize> {
        Some(self.data.num_samples())
    }

    fn accuracy(&self, theta: &ParamVector) -> Result<Option<f64>> {
        Ok(Some(logistic_accuracy(&self.data, theta)?))
    }
}

// ── Epoch batching ──────────────────────────────────────────────────

/// Seeded epoch batching: shuffle a permutation of `0..n`, slice it into
/// contiguous chunks of `batch_size`, keep the short last chunk.
pub fn shuffled_batches(n: usize, batch_size: usize, rng: &mut SplitMix64) -> Vec<Vec<usize>> {
    assert!(n > 0 && batch_size > 0);
    let mut idx: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut idx);
    idx.chunks(batch_size).map(<[usize]>::to_vec).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::{central_difference, relative_error, DEFAULT_STEP};

    fn pv(values: &[f64]) -> ParamVector {
        ParamVector::new(values.to_vec()).unwrap()
    }

    fn identity2() -> Quadratic {
        Quadratic::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn quadratic_hand_values() {
        let q = identity2();
        assert_eq!(q.eval(&pv(&[0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(q.eval(&pv(&[1.0, 1.0])).unwrap(), 1.0);

        let q = Quadratic::new(vec![vec![2.0, 0.0], vec![0.0, 1.0]], vec![2.0, 1.0]).unwrap();
        assert_eq!(q.eval(&pv(&[1.0, 1.0])).unwrap(), -1.5);
    }

    #[test]
    fn quadratic_gradient_cases() {
        let q = Quadratic::new(vec![vec![2.0, 0.5], vec![0.5, 1.0]], vec![1.0, -1.0]).unwrap();
        // gradient vanishes at the solve of A theta = b
        let at_min = q.grad(&q.minimizer()).unwrap();
        assert!(at_min.l2_norm() <= 1e-8);

        // identity case: gradient equals theta
        let q = identity2();
        let theta = pv(&[0.3, -0.7]);
        assert_eq!(q.grad(&theta).unwrap(), theta);
    }

    #[test]
    fn quadratic_rejects_asymmetric_and_indefinite() {
        assert!(matches!(
            Quadratic::new(vec![vec![1.0, 2.0], vec![0.0, 1.0]], vec![0.0, 0.0]),
            Err(Error::NotSpd)
        ));
        assert!(matches!(
            Quadratic::new(vec![vec![1.0, 0.0], vec![0.0, -1.0]], vec![0.0, 0.0]),
            Err(Error::NotSpd)
        ));
    }

    #[test]
    fn rosenbrock_hand_values() {
        assert_eq!(rosenbrock_eval(&pv(&[1.0, 1.0])).unwrap(), 0.0);
        assert_eq!(
            rosenbrock_grad(&pv(&[1.0, 1.0])).unwrap().as_slice(),
            &[0.0, 0.0]
        );
        assert_eq!(rosenbrock_eval(&pv(&[0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(
            rosenbrock_grad(&pv(&[0.0, 0.0])).unwrap().as_slice(),
            &[-2.0, 0.0]
        );
        assert!(rosenbrock_eval(&pv(&[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let mut rng = SplitMix64::new(555);
        let quad = Quadratic::new(
            vec![
                vec![2.0, 0.5, 0.0],
                vec![0.5, 1.5, 0.25],
                vec![0.0, 0.25, 1.0],
            ],
            vec![1.0, -0.5, 0.25],
        )
        .unwrap();
        let data = make_synth_classification(40, 3, 0.5, 17).unwrap();

        for _ in 0..100 {
            // quadratic
            let x: Vec<f64> = (0..3).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let analytic = quad.grad(&pv(&x)).unwrap();
            for c in 0..3 {
                let numeric =
                    central_difference(|v| quad.eval(&pv(v)).unwrap(), &x, c, DEFAULT_STEP);
                assert!(relative_error(analytic[c], numeric) <= 1e-5);
            }

            // rosenbrock
            let x: Vec<f64> = (0..2).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let analytic = rosenbrock_grad(&pv(&x)).unwrap();
            for c in 0..2 {
                let numeric =
                    central_difference(|v| rosenbrock_eval(&pv(v)).unwrap(), &x, c, DEFAULT_STEP);
                assert!(relative_error(analytic[c], numeric) <= 1e-5);
            }

            // logistic over the full batch
            let x: Vec<f64> = (0..4).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let batch: Vec<usize> = (0..40).collect();
            let analytic = logistic_minibatch_grad(&data, &pv(&x), &batch).unwrap();
            for c in 0..4 {
                let numeric = central_difference(
                    |v| logistic_loss(&data, &pv(v), &batch).unwrap(),
                    &x,
                    c,
                    DEFAULT_STEP,
                );
                assert!(relative_error(analytic[c], numeric) <= 1e-5);
            }
        }
    }

    #[test]
    fn synth_data_is_seeded_and_separable() {
        let a = make_synth_classification(200, 2, 0.5, 7).unwrap();
        let b = make_synth_classification(200, 2, 0.5, 7).unwrap();
        assert_eq!(a.features, b.features);
        assert_eq!(a.labels, b.labels);

        // constructed separator classifies everything correctly
        for i in 0..a.num_samples() {
            let score: f64 = a
                .sample(i)
                .iter()
                .zip(a.separator().iter())
                .map(|(x, w)| x * w)
                .sum();
            assert_eq!((score >= 0.0) as u8, a.label(i));
            assert!(score.abs() >= a.margin() - 1e-12);
        }

        // label balance for the default generator
        let positives = a.labels().iter().filter(|&&l| l == 1).count() as f64;
        let frac = positives / a.num_samples() as f64;
        assert!((0.4..=0.6).contains(&frac), "label balance {frac}");
    }

    #[test]
    fn synth_data_rejects_bad_parameters() {
        assert!(make_synth_classification(0, 2, 0.5, 7).is_err());
        assert!(make_synth_classification(10, 0, 0.5, 7).is_err());
        assert!(make_synth_classification(10, 2, 0.0, 7).is_err());
    }

    #[test]
    fn csv_export_shape() {
        let data = make_synth_classification(3, 2, 0.5, 1).unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "f0,f1,label");
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 3);
        }
    }

    #[test]
    fn saturated_separator_has_vanishing_gradient() {
        let data = make_synth_classification(100, 5, 0.5, 3).unwrap();
        let mut theta: Vec<f64> = data.separator().iter().map(|w| 200.0 * w).collect();
        theta.push(0.0); // bias
        let batch: Vec<usize> = (0..100).collect();
        let g = logistic_minibatch_grad(&data, &pv(&theta), &batch).unwrap();
        assert!(g.l2_norm() <= 1e-12);
        assert_eq!(logistic_accuracy(&data, &pv(&theta)).unwrap(), 1.0);
    }

    #[test]
    fn half_batches_average_to_full_gradient() {
        let data = make_synth_classification(60, 4, 0.5, 9).unwrap();
        let theta = pv(&[0.2, -0.1, 0.4, 0.05, -0.3]);
        let full: Vec<usize> = (0..60).collect();
        let g_full = logistic_minibatch_grad(&data, &theta, &full).unwrap();
        let g_a = logistic_minibatch_grad(&data, &theta, &full[..30]).unwrap();
        let g_b = logistic_minibatch_grad(&data, &theta, &full[30..]).unwrap();
        for i in 0..theta.len() {
            assert!((0.5 * (g_a[i] + g_b[i]) - g_full[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn size_weighted_batch_gradients_are_unbiased() {
        // 50 samples in batches of 16 leaves a short last batch; the
        // size-weighted mean of batch gradients equals the full gradient
        let data = make_synth_classification(50, 3, 0.5, 21).unwrap();
        let theta = pv(&[0.3, -0.2, 0.1, 0.0]);
        let full: Vec<usize> = (0..50).collect();
        let g_full = logistic_minibatch_grad(&data, &theta, &full).unwrap();

        let mut rng = SplitMix64::new(4);
        let batches = shuffled_batches(50, 16, &mut rng);
        assert_eq!(batches.len(), 4);
        assert_eq!(batches.last().unwrap().len(), 2);

        let mut acc = vec![0.0; theta.len()];
        for batch in &batches {
            let g = logistic_minibatch_grad(&data, &theta, batch).unwrap();
            for (a, v) in acc.iter_mut().zip(g.iter()) {
                *a += v * batch.len() as f64;
            }
        }
        for (a, f) in acc.iter().zip(g_full.iter()) {
            assert!((a / 50.0 - f).abs() <= 1e-12);
        }
    }

    #[test]
    fn batch_indices_are_validated() {
        let data = make_synth_classification(10, 2, 0.5, 2).unwrap();
        let theta = pv(&[0.0, 0.0, 0.0]);
        assert!(matches!(
            logistic_minibatch_grad(&data, &theta, &[3, 10]),
            Err(Error::IndexOutOfRange { index: 10, n: 10 })
        ));
        assert!(logistic_minibatch_grad(&data, &theta, &[]).is_err());
    }

    #[test]
    fn shuffled_batches_cover_everything_once() {
        let mut rng = SplitMix64::new(8);
        let batches = shuffled_batches(103, 16, &mut rng);
        assert_eq!(batches.len(), 7);
        let mut seen: Vec<usize> = batches.into_iter().flatten().collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..103).collect::<Vec<_>>());
    }

    #[test]
    fn split_halves_share_the_separator_and_partition_the_samples() {
        let data = make_synth_classification(50, 3, 0.5, 31).unwrap();
        let full_features = data.features.clone();
        let (head, tail) = data.split_at(30).unwrap();
        assert_eq!(head.num_samples(), 30);
        assert_eq!(tail.num_samples(), 20);
        assert_eq!(head.separator(), tail.separator());
        let mut rejoined = head.features.clone();
        rejoined.extend_from_slice(&tail.features);
        assert_eq!(rejoined, full_features);

        let tiny = make_synth_classification(5, 2, 0.5, 1).unwrap();
        assert!(tiny.clone().split_at(0).is_err());
        assert!(tiny.split_at(5).is_err());
    }

    #[test]
    fn linear_objective_gradient_is_constant() {
        let obj = LinearObjective::seeded(4, 11);
        let g1 = obj.grad(&ParamVector::zeros(4)).unwrap();
        let g2 = obj.grad(&pv(&[5.0, -3.0, 2.0, 0.5])).unwrap();
        assert_eq!(g1, g2);
    }
}
