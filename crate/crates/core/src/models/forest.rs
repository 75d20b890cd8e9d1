//! Random forest: bagged CART trees with per-split feature subsampling,
//! scored by averaging leaf probabilities.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{fit_on_indices, ClassTree, FeatureSampler};
use super::ForestParams;
use crate::data::{FeatureMatrix, LabeledDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<ClassTree>,
}

pub fn fit(train: &LabeledDataset, params: &ForestParams, seed: u64) -> ForestModel {
    let n = train.n_rows();
    let d = train.features.n_cols();
    let m = params
        .feature_subsample
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d);
    // per-tree seeds derive from the spec seed via one master stream
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut trees = Vec::with_capacity(params.n_trees);
    for _ in 0..params.n_trees {
        let bag_seed = master.gen::<u64>();
        let split_seed = master.gen::<u64>();
        let indices: Vec<usize> = if params.bootstrap {
            let mut rng = ChaCha8Rng::seed_from_u64(bag_seed);
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let sampler = (m < d).then(|| FeatureSampler {
            m,
            rng: ChaCha8Rng::seed_from_u64(split_seed),
        });
        trees.push(fit_on_indices(
            &train.features,
            &train.labels,
            &indices,
            &params.tree,
            sampler,
        ));
    }
    ForestModel { trees }
}

pub fn score(model: &ForestModel, features: &FeatureMatrix) -> Vec<f64> {
    let k = model.trees.len() as f64;
    features
        .rows()
        .map(|r| model.trees.iter().map(|t| t.predict_row(r)).sum::<f64>() / k)
        .collect()
}
