//! Multiple linear regression via the normal equations.
//!
//! `fit_linear` solves `(AᵀA + λI)β = Aᵀy` where `A` is the design matrix
//! with a trailing intercept column. The symmetric system is solved by a
//! Cholesky factorization; a non-positive pivot means the Gram matrix is
//! singular and the caller is told to retry with a small ridge term rather
//! than getting silently regularized output.

use serde::{Deserialize, Serialize};

use super::{check_feature_order, ModelError};
use crate::features::FeatureMatrix;

/// Fitted linear predictor `ŷ = x·weights + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub ridge_lambda: f64,
    pub feature_order: Vec<String>,
}

impl LinearModel {
    pub fn predict(&self, features: &FeatureMatrix) -> Result<Vec<f64>, ModelError> {
        check_feature_order(&self.feature_order, features)?;
        Ok(features
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.weights)
                    .map(|(x, w)| x * w)
                    .sum::<f64>()
                    + self.bias
            })
            .collect())
    }
}

/// Solve the symmetric positive-definite system `m·x = rhs` in place via
/// Cholesky. Returns `None` when a pivot falls below the scale-relative
/// tolerance, i.e. the matrix is singular or indefinite.
fn solve_spd(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    let max_diag = (0..n).map(|i| m[i][i].abs()).fold(0.0f64, f64::max);
    let tol = 1e-10 * max_diag.max(f64::MIN_POSITIVE);

    // Factor m = L·Lᵀ, storing L in the lower triangle.
    for j in 0..n {
        let mut d = m[j][j];
        for k in 0..j {
            d -= m[j][k] * m[j][k];
        }
        if d <= tol {
            return None;
        }
        let ljj = d.sqrt();
        m[j][j] = ljj;
        for i in (j + 1)..n {
            let mut v = m[i][j];
            for k in 0..j {
                v -= m[i][k] * m[j][k];
            }
            m[i][j] = v / ljj;
        }
    }
    // Forward substitution: L·z = rhs.
    for i in 0..n {
        for k in 0..i {
            rhs[i] -= m[i][k] * rhs[k];
        }
        rhs[i] /= m[i][i];
    }
    // Back substitution: Lᵀ·x = z.
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            rhs[i] -= m[k][i] * rhs[k];
        }
        rhs[i] /= m[i][i];
    }
    Some(rhs)
}

/// Fit by the normal equations with optional ridge regularization.
///
/// `ridge_lambda = 0` demands a full-rank design; a singular Gram matrix is
/// reported as [`ModelError::SingularGram`]. The result is deterministic —
/// no randomness is involved anywhere.
pub fn fit_linear(train: &FeatureMatrix, ridge_lambda: f64) -> Result<LinearModel, ModelError> {
    if train.n_rows() == 0 {
        return Err(ModelError::EmptyTrainingSet);
    }
    if !(ridge_lambda >= 0.0) || !ridge_lambda.is_finite() {
        return Err(ModelError::InvalidConfig(format!(
            "ridge_lambda must be ≥ 0, got {ridge_lambda}"
        )));
    }
    let d = train.n_cols();
    let n_aug = d + 1; // trailing intercept column

    let finite = |v: &f64| v.is_finite();
    if !train.rows.iter().flatten().all(finite) || !train.targets.iter().all(finite) {
        return Err(ModelError::NonFiniteInput);
    }

    // Gram matrix AᵀA and right-hand side Aᵀy, with A = [X | 1].
    let mut gram = vec![vec![0.0f64; n_aug]; n_aug];
    let mut rhs = vec![0.0f64; n_aug];
    for (row, &y) in train.rows.iter().zip(&train.targets) {
        for i in 0..d {
            let xi = row[i];
            for j in i..d {
                gram[i][j] += xi * row[j];
            }
            gram[i][d] += xi;
            rhs[i] += xi * y;
        }
        gram[d][d] += 1.0;
        rhs[d] += y;
    }
    for i in 0..n_aug {
        for j in 0..i {
            gram[i][j] = gram[j][i];
        }
        gram[i][i] += ridge_lambda;
    }

    let beta = solve_spd(gram, rhs).ok_or(ModelError::SingularGram)?;
    let (weights, bias) = beta.split_at(d);
    Ok(LinearModel {
        weights: weights.to_vec(),
        bias: bias[0],
        ridge_lambda,
        feature_order: train.columns.clone(),
    })
}
