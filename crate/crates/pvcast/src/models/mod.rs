//! The two predictors: multiple linear regression solved by the normal
//! equations, and a from-scratch multilayer perceptron trained with
//! backpropagation and mini-batch SGD + momentum.
//!
//! Training is single-threaded and fully deterministic: the same
//! `(seed, config, data)` always produces the same parameters. Fitted models
//! are immutable; predicting from many threads at once is safe.

pub mod artifact;
pub mod linear;
pub mod mlp;

pub use artifact::{load_model, save_model, ArtifactError, LoadedArtifact, FORMAT_VERSION};
pub use linear::{fit_linear, LinearModel};
pub use mlp::{fit_mlp, gradient_check, Activation, MlpModel};

use thiserror::Error;

use crate::features::FeatureMatrix;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("non-finite value in training data")]
    NonFiniteInput,
    #[error("gram matrix is singular; retry with ridge_lambda (1e-8 is usually enough)")]
    SingularGram,
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },
    #[error("feature order mismatch: model has {expected:?}, matrix has {got:?}")]
    FeatureOrderMismatch {
        expected: Vec<String>,
        got: Vec<String>,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Hyperparameters for MLP training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Momentum coefficient in [0, 1).
    pub momentum: f64,
    pub seed: u64,
    /// Stop after this many epochs without validation improvement.
    pub early_stop_patience: Option<usize>,
    /// Chronological tail of the training matrix held out for validation,
    /// as a fraction in [0, 0.5].
    pub validation_fraction: f64,
}

impl TrainConfig {
    /// Defaults: 200 epochs, batch 64, lr 0.01, momentum 0.9, no early stop.
    pub fn with_seed(seed: u64) -> Self {
        Self {
            epochs: 200,
            batch_size: 64,
            learning_rate: 0.01,
            momentum: 0.9,
            seed,
            early_stop_patience: None,
            validation_fraction: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(ModelError::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size < 1 {
            return Err(ModelError::InvalidConfig("batch_size must be ≥ 1".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(ModelError::InvalidConfig(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(0.0..=0.5).contains(&self.validation_fraction) {
            return Err(ModelError::InvalidConfig(format!(
                "validation_fraction must lie in [0, 0.5], got {}",
                self.validation_fraction
            )));
        }
        if self.early_stop_patience.is_some() && self.validation_fraction == 0.0 {
            return Err(ModelError::InvalidConfig(
                "early stopping needs validation_fraction > 0".into(),
            ));
        }
        Ok(())
    }
}

/// A trained predictor of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Mlp(MlpModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Linear(_) => "linear",
            Model::Mlp(_) => "mlp",
        }
    }

    pub fn feature_order(&self) -> &[String] {
        match self {
            Model::Linear(m) => &m.feature_order,
            Model::Mlp(m) => &m.feature_order,
        }
    }

    pub fn training_loss_curve(&self) -> &[f64] {
        match self {
            Model::Linear(_) => &[],
            Model::Mlp(m) => &m.training_loss,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Model::Linear(_) => 0,
            Model::Mlp(m) => m.seed,
        }
    }

    /// One normalized prediction per matrix row.
    pub fn predict(&self, features: &FeatureMatrix) -> Result<Vec<f64>, ModelError> {
        match self {
            Model::Linear(m) => m.predict(features),
            Model::Mlp(m) => m.predict(features),
        }
    }
}

pub(crate) fn check_feature_order(
    expected: &[String],
    features: &FeatureMatrix,
) -> Result<(), ModelError> {
    if expected != features.columns.as_slice() {
        return Err(ModelError::FeatureOrderMismatch {
            expected: expected.to_vec(),
            got: features.columns.clone(),
        });
    }
    Ok(())
}
