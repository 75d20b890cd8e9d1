//! Logistic regression trained by full-batch gradient descent on the
//! binary log-loss, over internally standardized features.

use serde::{Deserialize, Serialize};

use super::{sigmoid, LogisticParams, Standardizer};
use crate::data::{FeatureMatrix, LabeledDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub scaler: Standardizer,
    pub intercept: f64,
    pub weights: Vec<f64>,
}

/// Mean log-loss plus the L2 penalty, over pre-standardized rows.
pub fn log_loss(rows: &[Vec<f64>], y: &[u8], weights: &[f64], intercept: f64, l2: f64) -> f64 {
    let n = rows.len() as f64;
    let mut loss = 0.0;
    for (row, &yi) in rows.iter().zip(y) {
        let z = intercept + dot(weights, row);
        // log(1 + exp(-|z|)) form is stable for large |z|
        let log1p_exp = if z > 0.0 {
            (1.0 + (-z).exp()).ln()
        } else {
            -z + (1.0 + z.exp()).ln()
        };
        loss += if yi == 1 { log1p_exp } else { z + log1p_exp };
    }
    loss / n + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Gradient of `log_loss` with respect to (intercept, weights).
pub fn gradient(
    rows: &[Vec<f64>],
    y: &[u8],
    weights: &[f64],
    intercept: f64,
    l2: f64,
) -> (f64, Vec<f64>) {
    let n = rows.len() as f64;
    let mut grad_b = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    for (row, &yi) in rows.iter().zip(y) {
        let residual = sigmoid(intercept + dot(weights, row)) - yi as f64;
        grad_b += residual;
        for (g, &v) in grad_w.iter_mut().zip(row) {
            *g += residual * v;
        }
    }
    grad_b /= n;
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (grad_b, grad_w)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn fit(train: &LabeledDataset, params: &LogisticParams) -> LogisticModel {
    let scaler = Standardizer::fit(&train.features);
    let rows = scaler.transform(&train.features);
    let y: Vec<u8> = train.labels.iter().map(|l| l.0).collect();
    let mut weights = vec![0.0; train.features.n_cols()];
    let mut intercept = 0.0;
    for _ in 0..params.epochs {
        let (gb, gw) = gradient(&rows, &y, &weights, intercept, params.l2);
        intercept -= params.learning_rate * gb;
        for (w, g) in weights.iter_mut().zip(&gw) {
            *w -= params.learning_rate * g;
        }
    }
    LogisticModel {
        scaler,
        intercept,
        weights,
    }
}

pub fn score(model: &LogisticModel, features: &FeatureMatrix) -> Vec<f64> {
    features
        .rows()
        .map(|r| {
            let z = model.scaler.transform_row(r);
            sigmoid(model.intercept + dot(&model.weights, &z))
        })
        .collect()
}
