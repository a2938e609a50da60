//! From-scratch multilayer perceptron: dense layers, tanh or ReLU hidden
//! activations, identity output, mean-squared-error loss, trained by
//! mini-batch gradient descent with classical momentum.
//!
//! Reproducibility contract: weights are initialized Xavier-uniform from a
//! [`SplitMix64`](crate::rng::SplitMix64) stream seeded with `config.seed`,
//! drawn layer by layer in row-major (output-major) order with biases at
//! zero; each epoch then shuffles row indices with the same stream. Given
//! identical `(seed, config, data)` the fitted parameters are identical.

use serde::{Deserialize, Serialize};

use super::{check_feature_order, ModelError, TrainConfig};
use crate::features::FeatureMatrix;
use crate::rng::SplitMix64;

/// Hidden-layer nonlinearity; the output layer is always identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed in terms of the activation output `a`.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

/// A fitted feed-forward network. `weights[l]` is row-major with shape
/// `(layer_sizes[l+1], layer_sizes[l])`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    /// One activation per hidden layer (`layer_sizes.len() - 2` entries).
    pub activations: Vec<Activation>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub seed: u64,
    pub feature_order: Vec<String>,
    /// Mean training MSE per epoch.
    pub training_loss: Vec<f64>,
}

fn validate_layer_sizes(layer_sizes: &[usize], input_dim: usize) -> Result<(), ModelError> {
    if layer_sizes.len() < 2 {
        return Err(ModelError::InvalidConfig(
            "layer_sizes needs at least input and output entries".into(),
        ));
    }
    if layer_sizes[0] != input_dim {
        return Err(ModelError::InvalidConfig(format!(
            "layer_sizes[0] = {} but the matrix has {} input dims",
            layer_sizes[0], input_dim
        )));
    }
    if *layer_sizes.last().unwrap() != 1 {
        return Err(ModelError::InvalidConfig("output layer width must be 1".into()));
    }
    if layer_sizes.contains(&0) {
        return Err(ModelError::InvalidConfig("zero-width layer".into()));
    }
    Ok(())
}

impl MlpModel {
    /// Seeded Xavier-uniform initialization: each layer's weights are drawn
    /// from `U(−limit, limit)` with `limit = √(6 / (fan_in + fan_out))`,
    /// biases start at zero.
    pub fn init(
        layer_sizes: &[usize],
        activation: Activation,
        seed: u64,
        feature_order: Vec<String>,
    ) -> Result<Self, ModelError> {
        validate_layer_sizes(layer_sizes, layer_sizes[0])?;
        let mut rng = SplitMix64::new(seed);
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let w: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.uniform(-limit, limit))
                .collect();
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            activations: vec![activation; layer_sizes.len().saturating_sub(2)],
            weights,
            biases,
            seed,
            feature_order,
            training_loss: Vec::new(),
        })
    }

    pub fn n_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// Total parameter count (weights plus biases).
    pub fn n_params(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Structural invariants: adjacent layer dims agree, all parameters finite.
    pub fn validate(&self) -> Result<(), ModelError> {
        validate_layer_sizes(&self.layer_sizes, self.layer_sizes[0])?;
        if self.weights.len() != self.n_layers() || self.biases.len() != self.n_layers() {
            return Err(ModelError::InvalidConfig("layer count mismatch".into()));
        }
        if self.activations.len() != self.layer_sizes.len() - 2 {
            return Err(ModelError::InvalidConfig("activation count mismatch".into()));
        }
        for (l, pair) in self.layer_sizes.windows(2).enumerate() {
            if self.weights[l].len() != pair[0] * pair[1] || self.biases[l].len() != pair[1] {
                return Err(ModelError::InvalidConfig(format!("layer {l} shape mismatch")));
            }
        }
        let all_finite = self
            .weights
            .iter()
            .chain(self.biases.iter())
            .flatten()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(ModelError::NonFiniteInput);
        }
        Ok(())
    }

    fn forward_into(&self, input: &[f64], acts: &mut [Vec<f64>]) -> f64 {
        acts[0].copy_from_slice(input);
        for l in 0..self.n_layers() {
            let in_dim = self.layer_sizes[l];
            let activation = self.activations.get(l).copied();
            let (before, after) = acts.split_at_mut(l + 1);
            let src = &before[l];
            let dst = &mut after[0];
            for (o, out_v) in dst.iter_mut().enumerate() {
                let row = &self.weights[l][o * in_dim..(o + 1) * in_dim];
                let mut z = self.biases[l][o];
                for (w, x) in row.iter().zip(src.iter()) {
                    z += w * x;
                }
                *out_v = match activation {
                    Some(a) => a.apply(z),
                    None => z,
                };
            }
        }
        acts[self.n_layers()][0]
    }

    fn scratch(&self) -> Vec<Vec<f64>> {
        self.layer_sizes.iter().map(|&s| vec![0.0; s]).collect()
    }

    /// One finite output per matrix row.
    pub fn predict(&self, features: &FeatureMatrix) -> Result<Vec<f64>, ModelError> {
        check_feature_order(&self.feature_order, features)?;
        let mut acts = self.scratch();
        Ok(features
            .rows
            .iter()
            .map(|row| self.forward_into(row, &mut acts))
            .collect())
    }

    /// Forward pass on a bare feature vector (shape-checked length only).
    pub fn predict_row(&self, row: &[f64]) -> Result<f64, ModelError> {
        if row.len() != self.layer_sizes[0] {
            return Err(ModelError::InvalidConfig(format!(
                "input has {} dims, network expects {}",
                row.len(),
                self.layer_sizes[0]
            )));
        }
        let mut acts = self.scratch();
        Ok(self.forward_into(row, &mut acts))
    }
}

/// Mean squared error of paired slices.
pub fn mse(predictions: &[f64], targets: &[f64]) -> f64 {
    if predictions.is_empty() {
        return 0.0;
    }
    predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| (p - y) * (p - y))
        .sum::<f64>()
        / predictions.len() as f64
}

/// Per-parameter gradient buffers, mirroring the model's weight shapes.
struct Gradients {
    w: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros_like(model: &MlpModel) -> Self {
        Self {
            w: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            b: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    fn reset(&mut self) {
        for v in self.w.iter_mut().chain(self.b.iter_mut()) {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
    }
}

/// Accumulate ∂L/∂θ for one sample into `grads`, where the batch loss is
/// `(1/batch_n) Σ (pred − y)²`. Returns this sample's squared error.
///
/// `acts` must already hold the forward activations; `deltas[l]` is scratch
/// shaped like layer `l`'s output.
fn backprop_sample(
    model: &MlpModel,
    acts: &[Vec<f64>],
    target: f64,
    batch_n: usize,
    deltas: &mut [Vec<f64>],
    grads: &mut Gradients,
) -> f64 {
    let n_layers = model.n_layers();
    let pred = acts[n_layers][0];
    let err = pred - target;

    // Identity output: ∂L/∂z_out = 2(pred − y)/batch_n.
    deltas[n_layers - 1][0] = 2.0 * err / batch_n as f64;

    for l in (0..n_layers).rev() {
        let in_dim = model.layer_sizes[l];
        let out_dim = model.layer_sizes[l + 1];
        let (lower, upper) = deltas.split_at_mut(l);
        let delta = &upper[0];
        for o in 0..out_dim {
            let d = delta[o];
            let grad_row = &mut grads.w[l][o * in_dim..(o + 1) * in_dim];
            for (g, a) in grad_row.iter_mut().zip(acts[l].iter()) {
                *g += d * a;
            }
            grads.b[l][o] += d;
        }
        if l > 0 {
            let activation = model.activations[l - 1];
            let prev = &mut lower[l - 1];
            for (i, p) in prev.iter_mut().enumerate() {
                let mut sum = 0.0;
                for o in 0..out_dim {
                    sum += delta[o] * model.weights[l][o * in_dim + i];
                }
                *p = sum * activation.derivative_from_output(acts[l][i]);
            }
        }
    }
    err * err
}

/// Full-batch analytic gradients of the mean-squared-error loss.
fn loss_gradients(model: &MlpModel, rows: &[Vec<f64>], targets: &[f64]) -> Gradients {
    let mut grads = Gradients::zeros_like(model);
    let mut acts = model.scratch();
    let mut deltas: Vec<Vec<f64>> = model.layer_sizes[1..].iter().map(|&s| vec![0.0; s]).collect();
    for (row, &y) in rows.iter().zip(targets) {
        model.forward_into(row, &mut acts);
        backprop_sample(model, &acts, y, rows.len(), &mut deltas, &mut grads);
    }
    grads
}

fn batch_loss(model: &MlpModel, rows: &[Vec<f64>], targets: &[f64]) -> f64 {
    let mut acts = model.scratch();
    let preds: Vec<f64> = rows.iter().map(|r| model.forward_into(r, &mut acts)).collect();
    mse(&preds, targets)
}

/// Train a network of the given architecture on the matrix.
///
/// A `validation_fraction > 0` holds out the chronological tail of `train`;
/// with `early_stop_patience` set, training stops after that many epochs
/// without a validation improvement and the best-seen parameters are
/// restored. A non-finite epoch loss aborts with the offending epoch.
pub fn fit_mlp(
    train: &FeatureMatrix,
    config: &TrainConfig,
    layer_sizes: &[usize],
    activation: Activation,
) -> Result<MlpModel, ModelError> {
    config.validate()?;
    if train.n_rows() == 0 {
        return Err(ModelError::EmptyTrainingSet);
    }
    validate_layer_sizes(layer_sizes, train.n_cols())?;
    let finite = |v: &f64| v.is_finite();
    if !train.rows.iter().flatten().all(finite) || !train.targets.iter().all(finite) {
        return Err(ModelError::NonFiniteInput);
    }

    let n_val = (train.n_rows() as f64 * config.validation_fraction).floor() as usize;
    let n_fit = train.n_rows() - n_val;
    if n_fit == 0 {
        return Err(ModelError::EmptyTrainingSet);
    }
    let fit_rows = &train.rows[..n_fit];
    let fit_targets = &train.targets[..n_fit];
    let val_rows = &train.rows[n_fit..];
    let val_targets = &train.targets[n_fit..];

    let mut model = MlpModel::init(layer_sizes, activation, config.seed, train.columns.clone())?;
    // Epoch shuffles continue on the same stream that initialized the weights.
    let mut rng = SplitMix64::new(config.seed);
    for _ in 0..model.weights.iter().map(Vec::len).sum::<usize>() {
        rng.next_u64();
    }

    struct BestSnapshot {
        val_loss: f64,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
    }

    let mut velocity = Gradients::zeros_like(&model);
    let mut grads = Gradients::zeros_like(&model);
    let mut acts = model.scratch();
    let mut deltas: Vec<Vec<f64>> = model.layer_sizes[1..].iter().map(|&s| vec![0.0; s]).collect();
    let mut indices: Vec<usize> = (0..n_fit).collect();

    let mut best: Option<BestSnapshot> = None;
    let mut epochs_since_best = 0usize;

    for epoch in 0..config.epochs {
        rng.shuffle(&mut indices);
        let mut epoch_se = 0.0f64;

        for batch in indices.chunks(config.batch_size) {
            grads.reset();
            for &i in batch {
                model.forward_into(&fit_rows[i], &mut acts);
                epoch_se += backprop_sample(
                    &model,
                    &acts,
                    fit_targets[i],
                    batch.len(),
                    &mut deltas,
                    &mut grads,
                );
            }
            // Classical momentum: v ← μ·v + g, θ ← θ − lr·v.
            for l in 0..model.n_layers() {
                for (w, (v, g)) in model.weights[l]
                    .iter_mut()
                    .zip(velocity.w[l].iter_mut().zip(&grads.w[l]))
                {
                    *v = config.momentum * *v + g;
                    *w -= config.learning_rate * *v;
                }
                for (b, (v, g)) in model.biases[l]
                    .iter_mut()
                    .zip(velocity.b[l].iter_mut().zip(&grads.b[l]))
                {
                    *v = config.momentum * *v + g;
                    *b -= config.learning_rate * *v;
                }
            }
        }

        let epoch_loss = epoch_se / n_fit as f64;
        if !epoch_loss.is_finite() {
            return Err(ModelError::Diverged { epoch });
        }
        model.training_loss.push(epoch_loss);

        if n_val > 0 {
            let val_loss = batch_loss(&model, val_rows, val_targets);
            if !val_loss.is_finite() {
                return Err(ModelError::Diverged { epoch });
            }
            let improved = best.as_ref().is_none_or(|b| val_loss < b.val_loss);
            if improved {
                best = Some(BestSnapshot {
                    val_loss,
                    weights: model.weights.clone(),
                    biases: model.biases.clone(),
                });
                epochs_since_best = 0;
            } else {
                epochs_since_best += 1;
            }
            if let Some(patience) = config.early_stop_patience {
                if epochs_since_best >= patience {
                    break;
                }
            }
        }
    }

    if config.early_stop_patience.is_some() {
        if let Some(snapshot) = best {
            model.weights = snapshot.weights;
            model.biases = snapshot.biases;
        }
    }
    Ok(model)
}

/// Compare backpropagated gradients against central finite differences for
/// every parameter, returning the maximum relative error
/// `|g_a − g_n| / max(|g_a|, |g_n|, 1e-12)`.
pub fn gradient_check(
    model: &MlpModel,
    rows: &[Vec<f64>],
    targets: &[f64],
    epsilon: f64,
) -> Result<f64, ModelError> {
    if rows.is_empty() || rows.len() != targets.len() {
        return Err(ModelError::InvalidConfig("gradient check needs a nonempty batch".into()));
    }
    model.validate()?;
    let analytic = loss_gradients(model, rows, targets);

    let mut max_rel = 0.0f64;
    let mut check = |analytic_g: f64, numeric_g: f64| {
        let rel = (analytic_g - numeric_g).abs() / analytic_g.abs().max(numeric_g.abs()).max(1e-12);
        max_rel = max_rel.max(rel);
    };

    let mut probe = model.clone();
    for l in 0..model.n_layers() {
        for idx in 0..model.weights[l].len() {
            let orig = model.weights[l][idx];
            probe.weights[l][idx] = orig + epsilon;
            let up = batch_loss(&probe, rows, targets);
            probe.weights[l][idx] = orig - epsilon;
            let down = batch_loss(&probe, rows, targets);
            probe.weights[l][idx] = orig;
            check(analytic.w[l][idx], (up - down) / (2.0 * epsilon));
        }
        for idx in 0..model.biases[l].len() {
            let orig = model.biases[l][idx];
            probe.biases[l][idx] = orig + epsilon;
            let up = batch_loss(&probe, rows, targets);
            probe.biases[l][idx] = orig - epsilon;
            let down = batch_loss(&probe, rows, targets);
            probe.biases[l][idx] = orig;
            check(analytic.b[l][idx], (up - down) / (2.0 * epsilon));
        }
    }
    Ok(max_rel)
}
