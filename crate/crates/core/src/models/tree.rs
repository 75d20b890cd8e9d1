//! CART classification tree: Gini impurity, exhaustive midpoint split
//! search, and recursive growth to a depth cap.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ModelError, TreeParams};
use crate::data::{FeatureMatrix, LabeledDataset};
use crate::schema::DefaultLabel;

/// Gini impurity of a binary node: 1 - p0^2 - p1^2, in [0, 0.5].
pub fn gini_impurity(class_counts: (usize, usize)) -> Result<f64, ModelError> {
    let (c0, c1) = class_counts;
    let total = c0 + c1;
    if total == 0 {
        return Err(ModelError::EmptyNode);
    }
    let p0 = c0 as f64 / total as f64;
    let p1 = c1 as f64 / total as f64;
    Ok(1.0 - p0 * p0 - p1 * p1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Exhaustive Gini split search over `candidate_features` and every
/// midpoint between consecutive distinct sorted values. Ties broken by
/// (lower feature index, lower threshold). Returns `None` when the best
/// weighted impurity decrease is <= `min_gain`.
pub fn best_split_exact(
    x: &FeatureMatrix,
    indices: &[usize],
    labels: &[DefaultLabel],
    candidate_features: &[usize],
    min_gain: f64,
) -> Option<Split> {
    let n = indices.len();
    if n < 2 {
        return None;
    }
    let pos: usize = indices.iter().filter(|&&i| labels[i].0 == 1).count();
    let parent = gini_impurity((n - pos, pos)).ok()?;
    if parent == 0.0 {
        return None;
    }
    let mut best: Option<Split> = None;
    for &f in candidate_features {
        let mut vals: Vec<(f64, u8)> = indices
            .iter()
            .map(|&i| (x.get(i, f), labels[i].0))
            .collect();
        vals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut left_n = 0usize;
        let mut left_pos = 0usize;
        for w in 0..n - 1 {
            left_n += 1;
            left_pos += vals[w].1 as usize;
            if vals[w].0 == vals[w + 1].0 {
                continue;
            }
            let threshold = (vals[w].0 + vals[w + 1].0) / 2.0;
            let right_n = n - left_n;
            let right_pos = pos - left_pos;
            let gl = gini_impurity((left_n - left_pos, left_pos)).unwrap();
            let gr = gini_impurity((right_n - right_pos, right_pos)).unwrap();
            let weighted = (left_n as f64 * gl + right_n as f64 * gr) / n as f64;
            let gain = parent - weighted;
            let better = match &best {
                None => true,
                Some(b) => {
                    gain > b.gain
                        || (gain == b.gain
                            && (f < b.feature || (f == b.feature && threshold < b.threshold)))
                }
            };
            if better {
                best = Some(Split {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best.filter(|b| b.gain > min_gain)
}

/// Node array representation shared by classification and regression
/// trees: splits route `x[feature] <= threshold` to the left child.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassTree {
    pub nodes: Vec<Node>,
}

impl ClassTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[feature] <= threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Per-split random feature subsampler used by the random-forest path.
pub struct FeatureSampler {
    pub m: usize,
    pub rng: ChaCha8Rng,
}

fn grow(
    x: &FeatureMatrix,
    labels: &[DefaultLabel],
    indices: &[usize],
    params: &TreeParams,
    depth: usize,
    sampler: &mut Option<FeatureSampler>,
    nodes: &mut Vec<Node>,
) -> usize {
    let pos = indices.iter().filter(|&&i| labels[i].0 == 1).count();
    let leaf = |nodes: &mut Vec<Node>| {
        nodes.push(Node::Leaf {
            value: pos as f64 / indices.len() as f64,
        });
        nodes.len() - 1
    };
    if depth >= params.max_depth || indices.len() < params.min_samples_split {
        return leaf(nodes);
    }
    let d = x.n_cols();
    let candidates: Vec<usize> = match sampler {
        Some(s) if s.m < d => {
            let mut all: Vec<usize> = (0..d).collect();
            all.shuffle(&mut s.rng);
            all.truncate(s.m);
            all.sort_unstable();
            all
        }
        _ => (0..d).collect(),
    };
    let Some(split) = best_split_exact(x, indices, labels, &candidates, params.min_gain) else {
        return leaf(nodes);
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .iter()
        .partition(|&&i| x.get(i, split.feature) <= split.threshold);
    let me = nodes.len();
    nodes.push(Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: 0,
        right: 0,
    });
    let left = grow(x, labels, &left_idx, params, depth + 1, sampler, nodes);
    let right = grow(x, labels, &right_idx, params, depth + 1, sampler, nodes);
    if let Node::Split {
        left: l, right: r, ..
    } = &mut nodes[me]
    {
        *l = left;
        *r = right;
    }
    me
}

/// Fits a classification tree on the full feature set.
pub fn fit(train: &LabeledDataset, params: &TreeParams) -> ClassTree {
    let indices: Vec<usize> = (0..train.n_rows()).collect();
    fit_on_indices(&train.features, &train.labels, &indices, params, None)
}

/// Fits on a row subset, optionally drawing candidate features per split
/// from a sampler (the random-forest path).
pub fn fit_on_indices(
    x: &FeatureMatrix,
    labels: &[DefaultLabel],
    indices: &[usize],
    params: &TreeParams,
    mut sampler: Option<FeatureSampler>,
) -> ClassTree {
    let mut nodes = Vec::new();
    grow(x, labels, indices, params, 0, &mut sampler, &mut nodes);
    ClassTree { nodes }
}

pub fn score(tree: &ClassTree, features: &FeatureMatrix) -> Vec<f64> {
    features.rows().map(|r| tree.predict_row(r)).collect()
}
