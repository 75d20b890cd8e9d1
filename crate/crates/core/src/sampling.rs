//! Stratified train/test splitting and SMOTE oversampling of the
//! minority class. Only the training part is ever resampled.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::LabeledDataset;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SamplingError {
    #[error("class {class} has only {count} members, need at least 2")]
    DegenerateClass { class: u8, count: usize },
    #[error("minority class has {count} rows, need more than k_neighbors = {k}")]
    TooFewMinority { count: usize, k: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: 0.7,
            seed: 42,
            stratified: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    /// Minority/majority ratio after resampling.
    pub target_ratio: f64,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            k_neighbors: 5,
            target_ratio: 1.0,
            seed: 42,
        }
    }
}

/// Index partition behind a split, kept so callers can audit that every
/// model saw the identical train/test rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Splits per class: each class contributes `round(train_fraction * count)`
/// rows to the train part, chosen by a seeded shuffle. Row order within
/// each part follows the original dataset order.
pub fn stratified_split_indices(
    labels: &[crate::schema::DefaultLabel],
    cfg: &SplitConfig,
) -> Result<SplitIndices, SamplingError> {
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(SamplingError::InvalidConfig(format!(
            "train_fraction must be in (0,1), got {}",
            cfg.train_fraction
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    if cfg.stratified {
        for class in [0u8, 1] {
            let mut idx: Vec<usize> = labels
                .iter()
                .enumerate()
                .filter(|(_, l)| l.0 == class)
                .map(|(i, _)| i)
                .collect();
            if idx.len() < 2 {
                return Err(SamplingError::DegenerateClass {
                    class,
                    count: idx.len(),
                });
            }
            idx.shuffle(&mut rng);
            let n_train = (cfg.train_fraction * idx.len() as f64).round() as usize;
            let n_train = n_train.clamp(1, idx.len() - 1);
            train.extend_from_slice(&idx[..n_train]);
            test.extend_from_slice(&idx[n_train..]);
        }
    } else {
        let mut idx: Vec<usize> = (0..labels.len()).collect();
        idx.shuffle(&mut rng);
        let n_train = (cfg.train_fraction * idx.len() as f64).round() as usize;
        let n_train = n_train.clamp(1, idx.len().saturating_sub(1));
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

pub fn stratified_split(
    data: &LabeledDataset,
    cfg: &SplitConfig,
) -> Result<(LabeledDataset, LabeledDataset), SamplingError> {
    let idx = stratified_split_indices(&data.labels, cfg)?;
    Ok((data.select(&idx.train), data.select(&idx.test)))
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// K nearest minority neighbors of each minority row, exact brute force,
/// distance ties broken by lower row index.
fn minority_neighbors(points: &[&[f64]], k: usize) -> Vec<Vec<usize>> {
    let m = points.len();
    (0..m)
        .map(|i| {
            let mut others: Vec<(f64, usize)> = (0..m)
                .filter(|&j| j != i)
                .map(|j| (squared_distance(points[i], points[j]), j))
                .collect();
            others.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            others.truncate(k);
            others.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

/// SMOTE: appends synthetic minority rows `x + u * (x_nn - x)` until the
/// minority count reaches `round(target_ratio * majority)`. Original rows
/// are passed through unchanged, synthetic rows are appended after them.
pub fn smote(train: &LabeledDataset, cfg: &SmoteConfig) -> Result<LabeledDataset, SamplingError> {
    if cfg.k_neighbors < 1 {
        return Err(SamplingError::InvalidConfig(
            "k_neighbors must be at least 1".to_string(),
        ));
    }
    if !(cfg.target_ratio > 0.0 && cfg.target_ratio <= 1.0) {
        return Err(SamplingError::InvalidConfig(format!(
            "target_ratio must be in (0,1], got {}",
            cfg.target_ratio
        )));
    }
    let (neg, pos) = train.class_counts();
    let (minority_class, n_min, n_maj) = if pos <= neg {
        (1u8, pos, neg)
    } else {
        (0u8, neg, pos)
    };
    if n_min <= cfg.k_neighbors {
        return Err(SamplingError::TooFewMinority {
            count: n_min,
            k: cfg.k_neighbors,
        });
    }
    let target = (cfg.target_ratio * n_maj as f64).round() as usize;
    let n_new = target.saturating_sub(n_min);

    let minority_idx: Vec<usize> = train
        .labels
        .iter()
        .enumerate()
        .filter(|(_, l)| l.0 == minority_class)
        .map(|(i, _)| i)
        .collect();
    let points: Vec<&[f64]> = minority_idx
        .iter()
        .map(|&i| train.features.row(i))
        .collect();
    let neighbors = minority_neighbors(&points, cfg.k_neighbors);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut synthetic = Vec::with_capacity(n_new);
    for s in 0..n_new {
        let base = s % points.len();
        let nn = neighbors[base][rng.gen_range(0..neighbors[base].len())];
        let u: f64 = rng.gen_range(0.0..=1.0);
        let row: Vec<f64> = points[base]
            .iter()
            .zip(points[nn])
            .map(|(&x, &y)| x + u * (y - x))
            .collect();
        synthetic.push(row);
    }

    let mut features = train.features.clone();
    features
        .append_rows(&synthetic)
        .expect("synthetic rows are interpolations of finite rows");
    let mut labels = train.labels.clone();
    labels.extend(std::iter::repeat_n(
        crate::schema::DefaultLabel(minority_class),
        n_new,
    ));
    Ok(LabeledDataset { features, labels })
}
