//! Support vector machine trained by stochastic subgradient descent on
//! the hinge loss with L2 penalty 1/(2Cn), in the primal for the linear
//! kernel and in kernelized form for the RBF kernel. Decision values are
//! mapped to [0,1] through a fixed sigmoid.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sigmoid, Standardizer, SvmKernel, SvmParams};
use crate::data::{FeatureMatrix, LabeledDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SvmWeights {
    Linear {
        weights: Vec<f64>,
        bias: f64,
    },
    Rbf {
        gamma: f64,
        /// Support rows (standardized) with signed coefficients alpha_j * y_j / (lambda * T).
        support: Vec<Vec<f64>>,
        coefficients: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub scaler: Standardizer,
    pub weights: SvmWeights,
}

/// RBF kernel exp(-gamma * ||x - z||^2).
pub fn rbf_kernel(gamma: f64, x: &[f64], z: &[f64]) -> f64 {
    let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

pub fn fit(train: &LabeledDataset, params: &SvmParams, seed: u64) -> SvmModel {
    let scaler = Standardizer::fit(&train.features);
    let rows = scaler.transform(&train.features);
    let n = rows.len();
    let d = train.features.n_cols();
    let y: Vec<f64> = train
        .labels
        .iter()
        .map(|l| if l.0 == 1 { 1.0 } else { -1.0 })
        .collect();
    let lambda = 1.0 / (params.c * n as f64);
    let steps = params.epochs * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let weights = match params.kernel {
        SvmKernel::Linear => {
            let mut w = vec![0.0; d];
            let mut bias = 0.0;
            for t in 1..=steps {
                let i = rng.gen_range(0..n);
                let eta = 1.0 / (lambda * t as f64);
                let margin = y[i] * (dot(&w, &rows[i]) + bias);
                for v in &mut w {
                    *v *= 1.0 - eta * lambda;
                }
                if margin < 1.0 {
                    for (v, &x) in w.iter_mut().zip(&rows[i]) {
                        *v += eta * y[i] * x;
                    }
                    // unregularized bias on a bounded 1/t schedule
                    bias += y[i] / t as f64;
                }
            }
            SvmWeights::Linear { weights: w, bias }
        }
        SvmKernel::Rbf => {
            let gamma = params.gamma.unwrap_or(1.0 / d as f64);
            let mut alpha = vec![0u64; n];
            for t in 1..=steps {
                let i = rng.gen_range(0..n);
                let decision: f64 = alpha
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| a > 0)
                    .map(|(j, &a)| a as f64 * y[j] * rbf_kernel(gamma, &rows[j], &rows[i]))
                    .sum::<f64>()
                    / (lambda * t as f64);
                if y[i] * decision < 1.0 {
                    alpha[i] += 1;
                }
            }
            let scale = 1.0 / (lambda * steps as f64);
            let mut support = Vec::new();
            let mut coefficients = Vec::new();
            for (j, &a) in alpha.iter().enumerate() {
                if a > 0 {
                    support.push(rows[j].clone());
                    coefficients.push(a as f64 * y[j] * scale);
                }
            }
            SvmWeights::Rbf {
                gamma,
                support,
                coefficients,
            }
        }
    };
    SvmModel { scaler, weights }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn decision(model: &SvmModel, row: &[f64]) -> f64 {
    let z = model.scaler.transform_row(row);
    match &model.weights {
        SvmWeights::Linear { weights, bias } => dot(weights, &z) + bias,
        SvmWeights::Rbf {
            gamma,
            support,
            coefficients,
        } => support
            .iter()
            .zip(coefficients)
            .map(|(s, &c)| c * rbf_kernel(*gamma, s, &z))
            .sum(),
    }
}

pub fn score(model: &SvmModel, features: &FeatureMatrix) -> Vec<f64> {
    features
        .rows()
        .map(|r| sigmoid(decision(model, r)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::DefaultLabel;

    #[test]
    fn kernel_at_zero_distance_is_one() {
        let x = [0.3, -2.0, 7.5];
        for gamma in [0.01, 0.5, 10.0] {
            assert_eq!(rbf_kernel(gamma, &x, &x), 1.0);
        }
    }

    #[test]
    fn kernel_hand_value() {
        // gamma = 0.5, squared distance 2 -> e^-1
        let k = rbf_kernel(0.5, &[0.0, 0.0], &[1.0, 1.0]);
        assert!((k - (-1.0f64).exp()).abs() < 1e-9);
        assert!((k - 0.367879).abs() < 1e-6);
    }

    fn separable_2d() -> LabeledDataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        // generating hyperplane: x0 + x1 > 10
        for i in 0..15 {
            let a = (i % 5) as f64;
            let b = (i / 5) as f64;
            rows.push(vec![a, b]);
            labels.push(DefaultLabel(0));
            rows.push(vec![a + 10.0, b + 10.0]);
            labels.push(DefaultLabel(1));
        }
        LabeledDataset::new(
            FeatureMatrix::new(vec!["a".to_string(), "b".to_string()], rows).unwrap(),
            labels,
        )
        .unwrap()
    }

    #[test]
    fn linear_kernel_separates_separable_data() {
        let data = separable_2d();
        let params = SvmParams {
            kernel: SvmKernel::Linear,
            epochs: 30,
            ..SvmParams::default()
        };
        let model = fit(&data, &params, 1);
        let correct = score(&model, &data.features)
            .iter()
            .zip(&data.labels)
            .filter(|(s, l)| ((**s >= 0.5) as u8) == l.0)
            .count();
        assert_eq!(correct, data.n_rows());
    }

    #[test]
    fn rbf_fit_scores_are_probabilities_and_deterministic() {
        let data = separable_2d();
        let params = SvmParams::default();
        let a = fit(&data, &params, 2);
        let b = fit(&data, &params, 2);
        assert_eq!(a, b);
        for s in score(&a, &data.features) {
            assert!((0.0..=1.0).contains(&s));
        }
    }
}
