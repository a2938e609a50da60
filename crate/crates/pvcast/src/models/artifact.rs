//! Model persistence: a versioned JSON document with a trailing integrity
//! checksum line.
//!
//! File layout: the pretty-printed JSON document, a newline, then
//! `sha256:<hex>` over the document bytes, then a final newline. Loading
//! verifies the checksum before touching the JSON and refuses version
//! mismatches outright — there is no partial load.
//!
//! Numbers round-trip exactly (shortest-representation printing), so a
//! loaded model predicts bit-identically to the one saved.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{Activation, LinearModel, MlpModel, Model};
use crate::features::{FeatureSpec, TargetMode};
use crate::io_util::write_atomic;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt artifact: missing or truncated checksum line")]
    Truncated,
    #[error("artifact checksum mismatch")]
    ChecksumMismatch,
    #[error("unsupported artifact format version {found} (this build reads version {FORMAT_VERSION})")]
    VersionMismatch { found: u64 },
    #[error("malformed artifact: {0}")]
    Malformed(String),
}

#[derive(Serialize, Deserialize)]
struct LinearParams {
    weights: Vec<f64>,
    bias: f64,
    ridge_lambda: f64,
}

#[derive(Serialize, Deserialize)]
struct MlpParams {
    layers: Vec<usize>,
    activations: Vec<Activation>,
    /// Per layer: `layers[l+1]` rows of `layers[l]` weights.
    weights: Vec<Vec<Vec<f64>>>,
    biases: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ArtifactDoc {
    format_version: u64,
    kind: String,
    feature_order: Vec<String>,
    bounds: FeatureSpec,
    target_mode: TargetMode,
    seed: u64,
    training_loss_curve: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    linear: Option<LinearParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mlp: Option<MlpParams>,
}

/// Everything stored alongside the parameters.
#[derive(Debug, Clone)]
pub struct LoadedArtifact {
    pub model: Model,
    pub bounds: FeatureSpec,
    pub target_mode: TargetMode,
    pub seed: u64,
    pub training_loss_curve: Vec<f64>,
}

fn checksum_hex(doc: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(doc.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Render the full artifact file contents for `model`.
pub fn render_artifact(
    model: &Model,
    bounds: &FeatureSpec,
    target_mode: TargetMode,
) -> Result<String, ArtifactError> {
    let mut doc = ArtifactDoc {
        format_version: FORMAT_VERSION,
        kind: model.kind().to_string(),
        feature_order: model.feature_order().to_vec(),
        bounds: bounds.clone(),
        target_mode,
        seed: model.seed(),
        training_loss_curve: model.training_loss_curve().to_vec(),
        linear: None,
        mlp: None,
    };
    match model {
        Model::Linear(m) => {
            doc.linear = Some(LinearParams {
                weights: m.weights.clone(),
                bias: m.bias,
                ridge_lambda: m.ridge_lambda,
            });
        }
        Model::Mlp(m) => {
            let nested: Vec<Vec<Vec<f64>>> = m
                .weights
                .iter()
                .zip(m.layer_sizes.windows(2))
                .map(|(w, pair)| w.chunks(pair[0]).map(<[f64]>::to_vec).collect())
                .collect();
            doc.mlp = Some(MlpParams {
                layers: m.layer_sizes.clone(),
                activations: m.activations.clone(),
                weights: nested,
                biases: m.biases.clone(),
            });
        }
    }
    let json = serde_json::to_string_pretty(&doc)
        .map_err(|e| ArtifactError::Malformed(e.to_string()))?;
    let hex = checksum_hex(&json);
    Ok(format!("{json}\nsha256:{hex}\n"))
}

/// Serialize `model` to `path` (written atomically).
pub fn save_model(
    model: &Model,
    bounds: &FeatureSpec,
    target_mode: TargetMode,
    path: &Path,
) -> Result<(), ArtifactError> {
    let contents = render_artifact(model, bounds, target_mode)?;
    write_atomic(path, contents.as_bytes())?;
    Ok(())
}

fn model_from_doc(doc: ArtifactDoc) -> Result<LoadedArtifact, ArtifactError> {
    let model = match doc.kind.as_str() {
        "linear" => {
            let p = doc
                .linear
                .ok_or_else(|| ArtifactError::Malformed("linear artifact lacks parameters".into()))?;
            if p.weights.len() != doc.feature_order.len() {
                return Err(ArtifactError::Malformed(format!(
                    "{} weights for {} features",
                    p.weights.len(),
                    doc.feature_order.len()
                )));
            }
            Model::Linear(LinearModel {
                weights: p.weights,
                bias: p.bias,
                ridge_lambda: p.ridge_lambda,
                feature_order: doc.feature_order.clone(),
            })
        }
        "mlp" => {
            let p = doc
                .mlp
                .ok_or_else(|| ArtifactError::Malformed("mlp artifact lacks parameters".into()))?;
            let flat: Vec<Vec<f64>> = p
                .weights
                .into_iter()
                .map(|layer| layer.into_iter().flatten().collect())
                .collect();
            let model = MlpModel {
                layer_sizes: p.layers,
                activations: p.activations,
                weights: flat,
                biases: p.biases,
                seed: doc.seed,
                feature_order: doc.feature_order.clone(),
                training_loss: doc.training_loss_curve.clone(),
            };
            model
                .validate()
                .map_err(|e| ArtifactError::Malformed(e.to_string()))?;
            Model::Mlp(model)
        }
        other => {
            return Err(ArtifactError::Malformed(format!("unknown model kind `{other}`")));
        }
    };
    Ok(LoadedArtifact {
        model,
        bounds: doc.bounds,
        target_mode: doc.target_mode,
        seed: doc.seed,
        training_loss_curve: doc.training_loss_curve,
    })
}

/// Parse artifact file contents. Checksum first, then version, then the
/// document.
pub fn parse_artifact(contents: &str) -> Result<LoadedArtifact, ArtifactError> {
    let marker = "\nsha256:";
    let idx = contents.rfind(marker).ok_or(ArtifactError::Truncated)?;
    let doc = &contents[..idx];
    let stated = contents[idx + marker.len()..].trim();
    if stated.len() != 64 || !stated.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(ArtifactError::Truncated);
    }
    if checksum_hex(doc) != stated {
        return Err(ArtifactError::ChecksumMismatch);
    }

    let value: serde_json::Value =
        serde_json::from_str(doc).map_err(|e| ArtifactError::Malformed(e.to_string()))?;
    let found = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| ArtifactError::Malformed("missing format_version".into()))?;
    if found != FORMAT_VERSION {
        return Err(ArtifactError::VersionMismatch { found });
    }
    let doc: ArtifactDoc =
        serde_json::from_value(value).map_err(|e| ArtifactError::Malformed(e.to_string()))?;
    model_from_doc(doc)
}

/// Load a model artifact from disk.
pub fn load_model(path: &Path) -> Result<LoadedArtifact, ArtifactError> {
    let contents = std::fs::read_to_string(path)?;
    parse_artifact(&contents)
}
