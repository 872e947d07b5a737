//! Minimal multilayer perceptron with hand-written forward/backward passes.
//!
//! Parameters live in one flat [`ParamVector`] with a fixed layout: for each
//! layer, the weight block (row-major, out×in) followed by the bias block.
//! Hidden layers use tanh by default (relu available); the output layer is
//! softmax with mean cross-entropy, so the loss and step size are batch-size
//! independent.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::objectives::{Objective, SynthClassificationData};
use crate::rng::SplitMix64;
use crate::vector::ParamVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    fn forward(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed in terms of the activation output.
    fn grad_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Network shape: layer widths from input to output, plus the hidden
/// activation. The layout of the flat parameter vector is a pure function
/// of this spec.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    layer_dims: Vec<usize>,
    activation: Activation,
    offsets: Vec<(usize, usize)>, // (weight offset, bias offset) per layer
    param_count: usize,
}

impl MlpSpec {
    pub fn new(layer_dims: Vec<usize>, activation: Activation) -> Result<Self> {
        if layer_dims.len() < 2 {
            return Err(Error::InvalidSpec(
                "an MLP needs at least input and output dims".into(),
            ));
        }
        if layer_dims.contains(&0) {
            return Err(Error::InvalidSpec("layer dims must be positive".into()));
        }
        let mut offsets = Vec::with_capacity(layer_dims.len() - 1);
        let mut off = 0;
        for l in 0..layer_dims.len() - 1 {
            let (fan_in, fan_out) = (layer_dims[l], layer_dims[l + 1]);
            offsets.push((off, off + fan_in * fan_out));
            off += fan_in * fan_out + fan_out;
        }
        Ok(Self {
            layer_dims,
            activation,
            offsets,
            param_count: off,
        })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.layer_dims.len() - 1
    }

    /// Total parameter count: Σ (dᵢ·dᵢ₊₁ + dᵢ₊₁).
    pub fn param_count(&self) -> usize {
        self.param_count
    }

    /// Weight block of layer `l`, row-major (out×in).
    pub fn weights<'a>(&self, params: &'a ParamVector, l: usize) -> &'a [f64] {
        let (w, b) = self.offsets[l];
        &params.as_slice()[w..b]
    }

    /// Bias block of layer `l`.
    pub fn biases<'a>(&self, params: &'a ParamVector, l: usize) -> &'a [f64] {
        let (_, b) = self.offsets[l];
        &params.as_slice()[b..b + self.layer_dims[l + 1]]
    }

    fn check_params(&self, params: &ParamVector) -> Result<()> {
        if params.len() != self.param_count {
            return Err(Error::ShapeMismatch {
                expected: self.param_count,
                actual: params.len(),
            });
        }
        Ok(())
    }
}

/// Seeded init: weights uniform in ±√(3/fan_in) (unit-variance scaling),
/// biases exactly zero.
pub fn init_params(spec: &MlpSpec, seed: u64) -> ParamVector {
    let mut rng = SplitMix64::new(seed);
    let mut values = Vec::with_capacity(spec.param_count());
    for l in 0..spec.num_layers() {
        let fan_in = spec.layer_dims[l];
        let fan_out = spec.layer_dims[l + 1];
        let bound = (3.0 / fan_in as f64).sqrt();
        for _ in 0..fan_in * fan_out {
            values.push(rng.uniform(-bound, bound));
        }
        values.extend(std::iter::repeat_n(0.0, fan_out));
    }
    ParamVector::new(values).expect("bounded uniform draws are finite")
}

/// Activations retained by [`forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `layer_inputs[l]` is the batch fed into layer `l` (so `[0]` is the
    /// raw input batch); each is row-major batch×dim.
    layer_inputs: Vec<Vec<f64>>,
    probs: Vec<f64>, // batch×K, rows sum to 1
    batch: usize,
}

impl ForwardCache {
    /// Per-sample class probabilities, row-major batch×K.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn batch_size(&self) -> usize {
        self.batch
    }

    /// Index of the most probable class per sample.
    pub fn predictions(&self, num_classes: usize) -> Vec<usize> {
        (0..self.batch)
            .map(|i| {
                let row = &self.probs[i * num_classes..(i + 1) * num_classes];
                row.iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .map(|(k, _)| k)
                    .unwrap()
            })
            .collect()
    }
}

/// Forward pass over a flat row-major feature batch.
pub fn forward(spec: &MlpSpec, params: &ParamVector, features: &[f64]) -> Result<ForwardCache> {
    spec.check_params(params)?;
    let d_in = spec.input_dim();
    if features.is_empty() || !features.len().is_multiple_of(d_in) {
        return Err(Error::ShapeMismatch {
            expected: d_in,
            actual: features.len(),
        });
    }
    let batch = features.len() / d_in;
    let mut layer_inputs = Vec::with_capacity(spec.num_layers());
    layer_inputs.push(features.to_vec());

    for l in 0..spec.num_layers() {
        let (in_dim, out_dim) = (spec.layer_dims[l], spec.layer_dims[l + 1]);
        let w = spec.weights(params, l);
        let b = spec.biases(params, l);
        let input = &layer_inputs[l];
        let mut out = vec![0.0; batch * out_dim];
        for s in 0..batch {
            let x = &input[s * in_dim..(s + 1) * in_dim];
            for o in 0..out_dim {
                let mut z = b[o];
                let row = &w[o * in_dim..(o + 1) * in_dim];
                for (xi, wi) in x.iter().zip(row.iter()) {
                    z += xi * wi;
                }
                out[s * out_dim + o] = z;
            }
        }
        if l + 1 < spec.num_layers() {
            for v in &mut out {
                *v = spec.activation.forward(*v);
            }
            layer_inputs.push(out);
        } else {
            // output layer: row-wise softmax with max subtraction
            let k = out_dim;
            for s in 0..batch {
                let row = &mut out[s * k..(s + 1) * k];
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut sum = 0.0;
                for v in row.iter_mut() {
                    *v = (*v - max).exp();
                    sum += *v;
                }
                for v in row.iter_mut() {
                    *v /= sum;
                }
            }
            return Ok(ForwardCache {
                layer_inputs,
                probs: out,
                batch,
            });
        }
    }
    unreachable!("spec has at least one layer")
}

/// Mean cross-entropy of the cached probabilities against class labels.
pub fn cross_entropy(cache: &ForwardCache, labels: &[usize], num_classes: usize) -> Result<f64> {
    check_labels(cache, labels, num_classes)?;
    let mut loss = 0.0;
    for (s, &y) in labels.iter().enumerate() {
        loss -= cache.probs[s * num_classes + y].ln();
    }
    Ok(loss / cache.batch as f64)
}

fn check_labels(cache: &ForwardCache, labels: &[usize], num_classes: usize) -> Result<()> {
    if labels.len() != cache.batch {
        return Err(Error::ShapeMismatch {
            expected: cache.batch,
            actual: labels.len(),
        });
    }
    for &y in labels {
        if y >= num_classes {
            return Err(Error::IndexOutOfRange {
                index: y,
                n: num_classes,
            });
        }
    }
    Ok(())
}

/// Exact gradient of mean cross-entropy over the batch, flattened with the
/// parameter layout. `cache` must come from a matching [`forward`] call.
pub fn backward(
    spec: &MlpSpec,
    params: &ParamVector,
    cache: &ForwardCache,
    labels: &[usize],
) -> Result<ParamVector> {
    spec.check_params(params)?;
    let k = spec.output_dim();
    check_labels(cache, labels, k)?;
    if cache.layer_inputs.len() != spec.num_layers()
        || cache.layer_inputs[0].len() != cache.batch * spec.input_dim()
    {
        return Err(Error::InvalidSpec(
            "forward cache does not match network spec".into(),
        ));
    }

    let batch = cache.batch;
    let inv_batch = 1.0 / batch as f64;
    let mut grad = vec![0.0; spec.param_count()];

    // delta on the output layer: (p - onehot) / batch
    let mut delta = cache.probs.clone();
    for (s, &y) in labels.iter().enumerate() {
        delta[s * k + y] -= 1.0;
    }
    for v in &mut delta {
        *v *= inv_batch;
    }

    for l in (0..spec.num_layers()).rev() {
        let (in_dim, out_dim) = (spec.layer_dims[l], spec.layer_dims[l + 1]);
        let input = &cache.layer_inputs[l];
        let (w_off, b_off) = spec.offsets[l];

        for s in 0..batch {
            let x = &input[s * in_dim..(s + 1) * in_dim];
            let d = &delta[s * out_dim..(s + 1) * out_dim];
            for o in 0..out_dim {
                let dw = &mut grad[w_off + o * in_dim..w_off + (o + 1) * in_dim];
                for (g, xi) in dw.iter_mut().zip(x.iter()) {
                    *g += d[o] * xi;
                }
                grad[b_off + o] += d[o];
            }
        }

        if l > 0 {
            let w = spec.weights(params, l);
            let mut prev = vec![0.0; batch * in_dim];
            for s in 0..batch {
                let d = &delta[s * out_dim..(s + 1) * out_dim];
                let a = &input[s * in_dim..(s + 1) * in_dim];
                let p = &mut prev[s * in_dim..(s + 1) * in_dim];
                for o in 0..out_dim {
                    let row = &w[o * in_dim..(o + 1) * in_dim];
                    for (pi, wi) in p.iter_mut().zip(row.iter()) {
                        *pi += d[o] * wi;
                    }
                }
                for (pi, ai) in p.iter_mut().zip(a.iter()) {
                    *pi *= spec.activation.grad_from_output(*ai);
                }
            }
            delta = prev;
        }
    }

    ParamVector::new(grad)
}

// ── Classification objective over synthetic data ────────────────────

/// Mean cross-entropy of an MLP over a fixed dataset; labels are class
/// indices taken from the dataset's binary labels.
#[derive(Debug, Clone)]
pub struct MlpObjective {
    spec: MlpSpec,
    features: Vec<f64>,
    labels: Vec<usize>,
    n: usize,
}

impl MlpObjective {
    pub fn new(spec: MlpSpec, data: &SynthClassificationData) -> Result<Self> {
        if spec.input_dim() != data.feature_dim() {
            return Err(Error::ShapeMismatch {
                expected: spec.input_dim(),
                actual: data.feature_dim(),
            });
        }
        if spec.output_dim() < 2 {
            return Err(Error::InvalidSpec(
                "classification output needs at least two classes".into(),
            ));
        }
        let n = data.num_samples();
        let d = data.feature_dim();
        let mut features = Vec::with_capacity(n * d);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            features.extend_from_slice(data.sample(i));
            labels.push(data.label(i) as usize);
        }
        Ok(Self {
            spec,
            features,
            labels,
            n,
        })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    fn gather(&self, batch: &[usize]) -> Result<(Vec<f64>, Vec<usize>)> {
        if batch.is_empty() {
            return Err(Error::InvalidSpec("empty batch".into()));
        }
        let d = self.spec.input_dim();
        let mut feats = Vec::with_capacity(batch.len() * d);
        let mut labels = Vec::with_capacity(batch.len());
        for &i in batch {
            if i >= self.n {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    n: self.n,
                });
            }
            feats.extend_from_slice(&self.features[i * d..(i + 1) * d]);
            labels.push(self.labels[i]);
        }
        Ok((feats, labels))
    }
}

impl Objective for MlpObjective {
    fn dim(&self) -> usize {
        self.spec.param_count()
    }

    fn eval(&self, theta: &ParamVector) -> Result<f64> {
        let cache = forward(&self.spec, theta, &self.features)?;
        cross_entropy(&cache, &self.labels, self.spec.output_dim())
    }

    fn grad(&self, theta: &ParamVector) -> Result<ParamVector> {
        let cache = forward(&self.spec, theta, &self.features)?;
        backward(&self.spec, theta, &cache, &self.labels)
    }

    fn batch_grad(&self, theta: &ParamVector, batch: &[usize]) -> Result<ParamVector> {
        let (feats, labels) = self.gather(batch)?;
        let cache = forward(&self.spec, theta, &feats)?;
        backward(&self.spec, theta, &cache, &labels)
    }

    fn num_samples(&self) -> Option<usize> {
        Some(self.n)
    }

    fn accuracy(&self, theta: &ParamVector) -> Result<Option<f64>> {
        let cache = forward(&self.spec, theta, &self.features)?;
        let preds = cache.predictions(self.spec.output_dim());
        let hits = preds
            .iter()
            .zip(self.labels.iter())
            .filter(|(p, y)| p == y)
            .count();
        Ok(Some(hits as f64 / self.n as f64))
    }
}

// ── Flat binary parameter file ──────────────────────────────────────

/// File layout: the magic bytes, a little-endian u32 count of layer dims,
/// each dim as little-endian u32, then every parameter as a little-endian
/// f64 in layout order.
pub const PARAM_FILE_MAGIC: &[u8; 6] = b"RSGDM1";

pub fn save_params(path: &Path, spec: &MlpSpec, params: &ParamVector) -> Result<()> {
    spec.check_params(params)?;
    let mut buf = Vec::with_capacity(6 + 4 * (1 + spec.layer_dims.len()) + 8 * params.len());
    buf.extend_from_slice(PARAM_FILE_MAGIC);
    buf.extend_from_slice(&(spec.layer_dims.len() as u32).to_le_bytes());
    for &d in &spec.layer_dims {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in params.iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_params(path: &Path) -> Result<(Vec<usize>, ParamVector)> {
    let mut file = std::fs::File::open(path)?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;
    let mut cursor = &bytes[..];

    let mut magic = [0u8; 6];
    read_exact(&mut cursor, &mut magic)?;
    if &magic != PARAM_FILE_MAGIC {
        return Err(Error::BadFormat("bad magic bytes".into()));
    }
    let mut u32_buf = [0u8; 4];
    read_exact(&mut cursor, &mut u32_buf)?;
    let num_dims = u32::from_le_bytes(u32_buf) as usize;
    if num_dims < 2 {
        return Err(Error::BadFormat("fewer than two layer dims".into()));
    }
    let mut dims = Vec::with_capacity(num_dims);
    for _ in 0..num_dims {
        read_exact(&mut cursor, &mut u32_buf)?;
        dims.push(u32::from_le_bytes(u32_buf) as usize);
    }
    let expected: usize = dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    if cursor.len() != expected * 8 {
        return Err(Error::BadFormat(format!(
            "expected {expected} parameters, file holds {}",
            cursor.len() / 8
        )));
    }
    let mut values = Vec::with_capacity(expected);
    let mut f64_buf = [0u8; 8];
    for _ in 0..expected {
        read_exact(&mut cursor, &mut f64_buf)?;
        values.push(f64::from_le_bytes(f64_buf));
    }
    let params = ParamVector::new(values)
        .map_err(|_| Error::BadFormat("non-finite parameter value".into()))?;
    Ok((dims, params))
}

fn read_exact(cursor: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    if cursor.len() < buf.len() {
        return Err(Error::BadFormat("truncated file".into()));
    }
    buf.copy_from_slice(&cursor[..buf.len()]);
    *cursor = &cursor[buf.len()..];
    Ok(())
}
