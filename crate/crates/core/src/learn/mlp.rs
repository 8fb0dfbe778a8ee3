//! Fully-connected classifier with leaky-ReLU hidden layers and a softmax
//! output, trained with seeded mini-batch gradient descent with momentum.
//!
//! The output layer only exists to drive training; downstream code reads
//! the activations of the last hidden layer.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    /// Leaky-ReLU negative slope.
    pub alpha: f64,
    pub learning_rate: f64,
    /// Per-epoch inverse-time decay: `lr / (1 + decay * epoch)`.
    pub lr_decay: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: vec![128, 64, 64],
            alpha: 0.01,
            learning_rate: 0.01,
            lr_decay: 0.0,
            momentum: 0.9,
            epochs: 300,
            batch_size: 32,
            seed: 0,
        }
    }
}

/// One dense layer. `weights` is stored `inputs × outputs` so a batch
/// forward pass is `X · W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: DMatrix<f64>,
    pub biases: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    pub alpha: f64,
    pub seed: u64,
    pub layers: Vec<DenseLayer>,
}

/// Gradients laid out like [`MlpModel::layers`].
pub type Gradients = Vec<DenseLayer>;

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: MlpModel,
    /// Mean training loss per epoch.
    pub losses: Vec<f64>,
    pub accuracy: f64,
}

#[inline]
pub fn leaky_relu(x: f64, alpha: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        alpha * x
    }
}

#[inline]
fn leaky_relu_grad(x: f64, alpha: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        alpha
    }
}

/// Row-major rows into a matrix.
pub fn rows_to_matrix(rows: &[Vec<f64>], width: usize) -> Result<DMatrix<f64>> {
    if let Some(bad) = rows.iter().find(|r| r.len() != width) {
        return Err(Error::DimensionMismatch {
            expected: width,
            actual: bad.len(),
            context: "feature row width",
        });
    }
    Ok(DMatrix::from_fn(rows.len(), width, |i, j| rows[i][j]))
}

impl MlpModel {
    /// He-initialized model; biases start at zero.
    pub fn new(layer_sizes: Vec<usize>, alpha: f64, seed: u64) -> Result<Self> {
        if layer_sizes.len() < 3 {
            return Err(Error::InvalidArgument(
                "an MLP needs an input, at least one hidden and an output layer".into(),
            ));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidArgument("layer sizes must be positive".into()));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("leaky slope must lie in (0, 1), got {alpha}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = layer_sizes
            .windows(2)
            .map(|w| {
                let normal = Normal::new(0.0, (2.0 / w[0] as f64).sqrt()).expect("positive std");
                DenseLayer {
                    weights: DMatrix::from_fn(w[0], w[1], |_, _| normal.sample(&mut rng)),
                    biases: DVector::zeros(w[1]),
                }
            })
            .collect();
        Ok(Self {
            layer_sizes,
            alpha,
            seed,
            layers,
        })
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn hidden_width(&self) -> usize {
        self.layer_sizes[self.layer_sizes.len() - 2]
    }

    fn check_input(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.ncols() != self.input_width() {
            return Err(Error::DimensionMismatch {
                expected: self.input_width(),
                actual: x.ncols(),
                context: "MLP input width",
            });
        }
        Ok(())
    }

    fn affine(layer: &DenseLayer, a: &DMatrix<f64>) -> DMatrix<f64> {
        let mut z = a * &layer.weights;
        for mut row in z.row_iter_mut() {
            row += layer.biases.transpose();
        }
        z
    }

    /// Activations after the last hidden nonlinearity, one row per input row.
    pub fn hidden(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_input(x)?;
        let mut a = x.clone();
        for layer in &self.layers[..self.layers.len() - 1] {
            a = Self::affine(layer, &a);
            a.apply(|v| *v = leaky_relu(*v, self.alpha));
        }
        Ok(a)
    }

    /// Output-layer logits.
    pub fn logits(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let h = self.hidden(x)?;
        Ok(Self::affine(self.layers.last().expect("at least two layers"), &h))
    }

    /// Argmax class per row; exact ties go to class 0.
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        let z = self.logits(x)?;
        Ok(z.row_iter()
            .map(|r| {
                let mut best = 0;
                for k in 1..r.len() {
                    if r[k] > r[best] {
                        best = k;
                    }
                }
                best
            })
            .collect())
    }

    /// Mean softmax cross-entropy and its gradients for a batch with
    /// integer class targets.
    pub fn loss_and_gradients(&self, x: &DMatrix<f64>, y: &[usize]) -> Result<(f64, Gradients)> {
        self.check_input(x)?;
        if y.len() != x.nrows() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                actual: y.len(),
                context: "targets",
            });
        }
        let n = x.nrows() as f64;
        let n_layers = self.layers.len();

        // forward, keeping pre-activations and activations
        let mut acts = Vec::with_capacity(n_layers + 1);
        let mut pre = Vec::with_capacity(n_layers);
        acts.push(x.clone());
        for (l, layer) in self.layers.iter().enumerate() {
            let z = Self::affine(layer, &acts[l]);
            let a = if l + 1 < n_layers {
                z.map(|v| leaky_relu(v, self.alpha))
            } else {
                z.clone()
            };
            pre.push(z);
            acts.push(a);
        }

        let logits = &acts[n_layers];
        let mut delta = DMatrix::zeros(logits.nrows(), logits.ncols());
        let mut loss = 0.0;
        for (i, row) in logits.row_iter().enumerate() {
            let m = row.max();
            let sum: f64 = row.iter().map(|v| (v - m).exp()).sum();
            let log_sum = m + sum.ln();
            loss += log_sum - row[y[i]];
            for k in 0..row.len() {
                let p = (row[k] - log_sum).exp();
                delta[(i, k)] = (p - if k == y[i] { 1.0 } else { 0.0 }) / n;
            }
        }
        loss /= n;

        let mut grads = Vec::with_capacity(n_layers);
        for l in (0..n_layers).rev() {
            let gw = acts[l].transpose() * &delta;
            let gb = DVector::from_iterator(delta.ncols(), delta.column_iter().map(|c| c.sum()));
            if l > 0 {
                let mut back = &delta * self.layers[l].weights.transpose();
                back.zip_apply(&pre[l - 1], |d, z| *d *= leaky_relu_grad(z, self.alpha));
                delta = back;
            }
            grads.push(DenseLayer {
                weights: gw,
                biases: gb,
            });
        }
        grads.reverse();
        Ok((loss, grads))
    }

    /// Fraction of rows whose argmax output matches the target.
    pub fn accuracy(&self, x: &DMatrix<f64>, y: &[usize]) -> Result<f64> {
        if y.is_empty() {
            return Ok(0.0);
        }
        let pred = self.predict(x)?;
        Ok(pred.iter().zip(y).filter(|(p, t)| p == t).count() as f64 / y.len() as f64)
    }
}

/// Trains a classifier from scratch. Deterministic for a given seed.
pub fn train_mlp(x: &DMatrix<f64>, y: &[usize], cfg: &MlpConfig) -> Result<TrainReport> {
    let n_classes = 2;
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            actual: y.len(),
            context: "targets",
        });
    }
    for c in 0..n_classes {
        let count = y.iter().filter(|&&t| t == c).count();
        if count < 2 {
            return Err(Error::InvalidArgument(format!(
                "class {c} has {count} training instances; at least 2 are required"
            )));
        }
    }
    if let Some(&bad) = y.iter().find(|&&t| t >= n_classes) {
        return Err(Error::InvalidArgument(format!("target {bad} is not a binary class")));
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be positive".into()));
    }

    let mut sizes = Vec::with_capacity(cfg.hidden.len() + 2);
    sizes.push(x.ncols());
    sizes.extend(&cfg.hidden);
    sizes.push(n_classes);
    let mut model = MlpModel::new(sizes, cfg.alpha, cfg.seed)?;

    let mut velocity: Vec<DenseLayer> = model
        .layers
        .iter()
        .map(|l| DenseLayer {
            weights: DMatrix::zeros(l.weights.nrows(), l.weights.ncols()),
            biases: DVector::zeros(l.biases.len()),
        })
        .collect();
    // separate stream so shuffling does not depend on the init draws
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_5eed_5eed_5eed);
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    let mut losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let lr = cfg.learning_rate / (1.0 + cfg.lr_decay * epoch as f64);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let xb = x.select_rows(batch);
            let yb: Vec<usize> = batch.iter().map(|&i| y[i]).collect();
            let (loss, grads) = model.loss_and_gradients(&xb, &yb)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            epoch_loss += loss * batch.len() as f64;
            for ((layer, v), g) in model.layers.iter_mut().zip(&mut velocity).zip(&grads) {
                v.weights *= cfg.momentum;
                v.weights -= &g.weights * lr;
                v.biases *= cfg.momentum;
                v.biases.axpy(-lr, &g.biases, 1.0);
                layer.weights += &v.weights;
                layer.biases += &v.biases;
            }
        }
        let mean_loss = epoch_loss / x.nrows() as f64;
        if !mean_loss.is_finite() || model.layers.iter().any(|l| !l.weights.iter().all(|w| w.is_finite())) {
            return Err(Error::Diverged { epoch });
        }
        losses.push(mean_loss);
    }

    let accuracy = model.accuracy(x, y)?;
    Ok(TrainReport {
        model,
        losses,
        accuracy,
    })
}

/// Checkpoint document: weights are row-major `outputs × inputs` arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpCheckpoint {
    pub layer_sizes: Vec<usize>,
    pub alpha: f64,
    pub seed: u64,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl From<&MlpModel> for MlpCheckpoint {
    fn from(m: &MlpModel) -> Self {
        let weights = m
            .layers
            .iter()
            .map(|l| {
                let (nin, nout) = l.weights.shape();
                let mut flat = Vec::with_capacity(nin * nout);
                for o in 0..nout {
                    for i in 0..nin {
                        flat.push(l.weights[(i, o)]);
                    }
                }
                flat
            })
            .collect();
        let biases = m.layers.iter().map(|l| l.biases.iter().copied().collect()).collect();
        Self {
            layer_sizes: m.layer_sizes.clone(),
            alpha: m.alpha,
            seed: m.seed,
            weights,
            biases,
        }
    }
}

impl TryFrom<MlpCheckpoint> for MlpModel {
    type Error = Error;

    fn try_from(c: MlpCheckpoint) -> Result<Self> {
        let n_layers = c.layer_sizes.len().saturating_sub(1);
        if c.layer_sizes.len() < 3 || c.weights.len() != n_layers || c.biases.len() != n_layers {
            return Err(Error::MalformedDocument("checkpoint layer count mismatch".into()));
        }
        let mut layers = Vec::with_capacity(n_layers);
        for (l, w) in c.layer_sizes.windows(2).enumerate() {
            let (nin, nout) = (w[0], w[1]);
            if c.weights[l].len() != nin * nout || c.biases[l].len() != nout {
                return Err(Error::MalformedDocument(format!("checkpoint layer {l} has the wrong shape")));
            }
            layers.push(DenseLayer {
                weights: DMatrix::from_fn(nin, nout, |i, o| c.weights[l][o * nin + i]),
                biases: DVector::from_vec(c.biases[l].clone()),
            });
        }
        if !(c.alpha > 0.0 && c.alpha < 1.0) {
            return Err(Error::MalformedDocument(format!("leaky slope {} outside (0, 1)", c.alpha)));
        }
        Ok(MlpModel {
            layer_sizes: c.layer_sizes,
            alpha: c.alpha,
            seed: c.seed,
            layers,
        })
    }
}

impl Serialize for MlpModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MlpCheckpoint::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for MlpModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let c = MlpCheckpoint::deserialize(d)?;
        MlpModel::try_from(c).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor() -> (DMatrix<f64>, Vec<usize>) {
        let x = DMatrix::from_row_slice(4, 2, &[0., 0., 0., 1., 1., 0., 1., 1.]);
        (x, vec![0, 1, 1, 0])
    }

    #[test]
    fn leaky_value() {
        assert_eq!(leaky_relu(-1.0, 0.01), -0.01);
        assert_eq!(leaky_relu(2.0, 0.01), 2.0);
    }

    #[test]
    fn learns_xor() {
        let (x, y) = xor();
        // repeat rows so both classes have >= 2 instances per the contract
        let x = DMatrix::from_fn(8, 2, |i, j| x[(i % 4, j)]);
        let y: Vec<usize> = (0..8).map(|i| y[i % 4]).collect();
        let cfg = MlpConfig {
            hidden: vec![8, 8],
            epochs: 500,
            batch_size: 4,
            learning_rate: 0.05,
            seed: 3,
            ..MlpConfig::default()
        };
        let report = train_mlp(&x, &y, &cfg).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert!(report.losses.last().unwrap() < &report.losses[0]);
    }

    #[test]
    fn zero_model_gives_zero_representation() {
        let mut m = MlpModel::new(vec![3, 4, 2], 0.01, 1).unwrap();
        for l in &mut m.layers {
            l.weights.fill(0.0);
            l.biases.fill(0.0);
        }
        let x = DMatrix::from_row_slice(2, 3, &[1., -2., 3., 0.5, 0.5, 0.5]);
        assert!(m.hidden(&x).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_hidden_layer_passes_non_negative_input() {
        let mut m = MlpModel::new(vec![3, 3, 2], 0.01, 1).unwrap();
        m.layers[0].weights = DMatrix::identity(3, 3);
        m.layers[0].biases.fill(0.0);
        let x = DMatrix::from_row_slice(2, 3, &[1., 0., 3., 0.5, 2.5, 0.0]);
        assert_eq!(m.hidden(&x).unwrap(), x);
    }

    #[test]
    fn representation_width_is_last_hidden() {
        let m = MlpModel::new(vec![10, 128, 64, 64, 2], 0.01, 0).unwrap();
        let x = DMatrix::zeros(5, 10);
        assert_eq!(m.hidden(&x).unwrap().ncols(), 64);
        assert!(matches!(
            m.hidden(&DMatrix::zeros(5, 9)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn constant_output_on_balanced_classes() {
        let mut m = MlpModel::new(vec![2, 3, 2], 0.01, 0).unwrap();
        for l in &mut m.layers {
            l.weights.fill(0.0);
        }
        let x = DMatrix::from_row_slice(4, 2, &[1., 2., 3., 4., 5., 6., 7., 8.]);
        assert_eq!(m.accuracy(&x, &[0, 0, 1, 1]).unwrap(), 0.5);
    }

    #[test]
    fn huge_learning_rate_diverges() {
        let (x, y) = xor();
        let x = DMatrix::from_fn(8, 2, |i, j| x[(i % 4, j)] * 1e3);
        let y: Vec<usize> = (0..8).map(|i| y[i % 4]).collect();
        let cfg = MlpConfig {
            hidden: vec![8],
            learning_rate: 1e12,
            epochs: 50,
            ..MlpConfig::default()
        };
        assert!(matches!(train_mlp(&x, &y, &cfg), Err(Error::Diverged { .. })));
    }

    #[test]
    fn checkpoint_round_trip() {
        let m = MlpModel::new(vec![3, 5, 4, 2], 0.02, 9).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: MlpModel = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
        let c = MlpCheckpoint::from(&m);
        // row-major outputs x inputs: element (o=1, i=2) of the first layer
        assert_eq!(c.weights[0][3 + 2], m.layers[0].weights[(2, 1)]);
    }
}
