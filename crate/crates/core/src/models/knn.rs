//! K-nearest-neighbors scoring over the standardized training set. The
//! score is the fraction of the k nearest training rows labeled 1.

use serde::{Deserialize, Serialize};

use super::{KnnParams, Standardizer};
use crate::data::{FeatureMatrix, LabeledDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub scaler: Standardizer,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub k: usize,
}

pub fn fit(train: &LabeledDataset, params: &KnnParams) -> KnnModel {
    let scaler = Standardizer::fit(&train.features);
    KnnModel {
        rows: scaler.transform(&train.features),
        scaler,
        labels: train.labels.iter().map(|l| l.0).collect(),
        k: params.k,
    }
}

pub fn score(model: &KnnModel, features: &FeatureMatrix) -> Vec<f64> {
    features
        .rows()
        .map(|r| {
            let q = model.scaler.transform_row(r);
            let mut dist: Vec<(f64, usize)> = model
                .rows
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let d2: f64 = row.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
                    (d2, i)
                })
                .collect();
            // distance ties broken by lower training-row index
            dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let votes: usize = dist
                .iter()
                .take(model.k)
                .map(|&(_, i)| model.labels[i] as usize)
                .sum();
            votes as f64 / model.k as f64
        })
        .collect()
}
