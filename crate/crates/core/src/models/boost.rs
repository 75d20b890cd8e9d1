//! Gradient-boosted regression trees on the binary log-loss. Two growth
//! strategies share the Newton gain with L2 leaf regularization: exact
//! split search with level-wise growth, and histogram split search with
//! best-first leaf-wise growth under a leaf-count budget.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::tree::Node;
use super::{sigmoid, BoostParams, GrowthStrategy};
use crate::data::{FeatureMatrix, LabeledDataset};

/// Regression tree over the same node-array layout as the classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegTree {
    pub nodes: Vec<Node>,
}

impl RegTree {
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

/// Newton split score: 1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l)].
pub fn newton_gain(g_left: f64, h_left: f64, g_right: f64, h_right: f64, lambda: f64) -> f64 {
    let term = |g: f64, h: f64| g * g / (h + lambda);
    0.5 * (term(g_left, h_left) + term(g_right, h_right) - term(g_left + g_right, h_left + h_right))
}

fn leaf_value(g_sum: f64, h_sum: f64, lambda: f64) -> f64 {
    -g_sum / (h_sum + lambda)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSplit {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

fn better(candidate: &NewtonSplit, best: &Option<NewtonSplit>) -> bool {
    match best {
        None => true,
        Some(b) => {
            candidate.gain > b.gain
                || (candidate.gain == b.gain
                    && (candidate.feature < b.feature
                        || (candidate.feature == b.feature && candidate.threshold < b.threshold)))
        }
    }
}

/// Exact Newton split search over every midpoint between consecutive
/// distinct sorted values. Returns `None` when no positive-gain split
/// exists. Ties broken by (lower feature index, lower threshold).
pub fn best_split_newton_exact(
    x: &FeatureMatrix,
    indices: &[usize],
    gradients: &[f64],
    hessians: &[f64],
    lambda: f64,
) -> Option<NewtonSplit> {
    let n = indices.len();
    if n < 2 {
        return None;
    }
    let g_total: f64 = indices.iter().map(|&i| gradients[i]).sum();
    let h_total: f64 = indices.iter().map(|&i| hessians[i]).sum();
    let mut best: Option<NewtonSplit> = None;
    for f in 0..x.n_cols() {
        let mut vals: Vec<(f64, f64, f64)> = indices
            .iter()
            .map(|&i| (x.get(i, f), gradients[i], hessians[i]))
            .collect();
        vals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut g_left = 0.0;
        let mut h_left = 0.0;
        for w in 0..n - 1 {
            g_left += vals[w].1;
            h_left += vals[w].2;
            if vals[w].0 == vals[w + 1].0 {
                continue;
            }
            let candidate = NewtonSplit {
                feature: f,
                threshold: (vals[w].0 + vals[w + 1].0) / 2.0,
                gain: newton_gain(g_left, h_left, g_total - g_left, h_total - h_left, lambda),
            };
            if better(&candidate, &best) {
                best = Some(candidate);
            }
        }
    }
    best.filter(|b| b.gain > 0.0)
}

/// Per-feature bin edges fitted on training quantiles. A value's bin is
/// the number of edges strictly below it; splitting at edge `b` sends
/// bins `0..=b` left, which is exactly the rule `x <= edges[b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMapper {
    pub edges: Vec<Vec<f64>>,
}

impl BinMapper {
    pub fn fit(x: &FeatureMatrix, n_bins: usize) -> BinMapper {
        let edges = (0..x.n_cols())
            .map(|f| {
                let mut vals: Vec<f64> = (0..x.n_rows()).map(|r| x.get(r, f)).collect();
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                vals.dedup();
                if vals.len() <= n_bins {
                    vals.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
                } else {
                    // rank-based cuts so binning is invariant under
                    // monotone rescaling of the feature
                    let mut cuts = Vec::with_capacity(n_bins - 1);
                    for k in 1..n_bins {
                        let pos = k * vals.len() / n_bins;
                        let edge = (vals[pos - 1] + vals[pos]) / 2.0;
                        if cuts.last() != Some(&edge) {
                            cuts.push(edge);
                        }
                    }
                    cuts
                }
            })
            .collect();
        BinMapper { edges }
    }

    pub fn bin(&self, feature: usize, value: f64) -> usize {
        self.edges[feature].partition_point(|&e| e < value)
    }

    pub fn n_bins(&self, feature: usize) -> usize {
        self.edges[feature].len() + 1
    }
}

/// Rows pre-quantized through a `BinMapper`.
#[derive(Debug, Clone)]
pub struct BinnedMatrix {
    pub mapper: BinMapper,
    bins: Vec<u32>,
    n_rows: usize,
    n_cols: usize,
}

impl BinnedMatrix {
    pub fn from_matrix(x: &FeatureMatrix, n_bins: usize) -> BinnedMatrix {
        let mapper = BinMapper::fit(x, n_bins);
        let mut bins = Vec::with_capacity(x.n_rows() * x.n_cols());
        for row in x.rows() {
            for (f, &v) in row.iter().enumerate() {
                bins.push(mapper.bin(f, v) as u32);
            }
        }
        BinnedMatrix {
            mapper,
            bins,
            n_rows: x.n_rows(),
            n_cols: x.n_cols(),
        }
    }

    pub fn bin_of(&self, row: usize, feature: usize) -> usize {
        self.bins[row * self.n_cols + feature] as usize
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSplit {
    pub feature: usize,
    pub bin: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Newton split search over histogram bin boundaries. With one distinct
/// value per bin this selects the same boundary as the exact search.
pub fn best_split_histogram(
    binned: &BinnedMatrix,
    indices: &[usize],
    gradients: &[f64],
    hessians: &[f64],
    lambda: f64,
) -> Option<HistogramSplit> {
    if indices.len() < 2 {
        return None;
    }
    let mut best: Option<HistogramSplit> = None;
    for f in 0..binned.n_cols {
        let n_bins = binned.mapper.n_bins(f);
        if n_bins < 2 {
            continue;
        }
        let mut g_hist = vec![0.0; n_bins];
        let mut h_hist = vec![0.0; n_bins];
        let mut count = vec![0usize; n_bins];
        let mut g_total = 0.0;
        let mut h_total = 0.0;
        for &i in indices {
            let b = binned.bin_of(i, f);
            g_hist[b] += gradients[i];
            h_hist[b] += hessians[i];
            count[b] += 1;
            g_total += gradients[i];
            h_total += hessians[i];
        }
        let total = indices.len();
        let mut g_left = 0.0;
        let mut h_left = 0.0;
        let mut n_left = 0usize;
        for b in 0..n_bins - 1 {
            g_left += g_hist[b];
            h_left += h_hist[b];
            n_left += count[b];
            if n_left == 0 || n_left == total {
                continue;
            }
            let threshold = binned.mapper.edges[f][b];
            let candidate = HistogramSplit {
                feature: f,
                bin: b,
                threshold,
                gain: newton_gain(g_left, h_left, g_total - g_left, h_total - h_left, lambda),
            };
            let accept = match &best {
                None => true,
                Some(cur) => {
                    candidate.gain > cur.gain
                        || (candidate.gain == cur.gain
                            && (candidate.feature < cur.feature
                                || (candidate.feature == cur.feature
                                    && candidate.threshold < cur.threshold)))
                }
            };
            if accept {
                best = Some(candidate);
            }
        }
    }
    best.filter(|b| b.gain > 0.0)
}

fn sums(indices: &[usize], gradients: &[f64], hessians: &[f64]) -> (f64, f64) {
    (
        indices.iter().map(|&i| gradients[i]).sum(),
        indices.iter().map(|&i| hessians[i]).sum(),
    )
}

/// Level-wise growth: every node with a positive-gain exact split is
/// expanded until the depth cap. Leaf value is -G/(H+lambda).
pub fn grow_tree_level_wise(
    x: &FeatureMatrix,
    indices: &[usize],
    gradients: &[f64],
    hessians: &[f64],
    params: &BoostParams,
) -> RegTree {
    fn grow(
        x: &FeatureMatrix,
        indices: &[usize],
        g: &[f64],
        h: &[f64],
        params: &BoostParams,
        depth: usize,
        nodes: &mut Vec<Node>,
    ) -> usize {
        let (gs, hs) = sums(indices, g, h);
        let split = if depth < params.max_depth {
            best_split_newton_exact(x, indices, g, h, params.lambda)
        } else {
            None
        };
        let Some(split) = split else {
            nodes.push(Node::Leaf {
                value: leaf_value(gs, hs, params.lambda),
            });
            return nodes.len() - 1;
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
        let left = grow(x, &left_idx, g, h, params, depth + 1, nodes);
        let right = grow(x, &right_idx, g, h, params, depth + 1, nodes);
        if let Node::Split {
            left: l, right: r, ..
        } = &mut nodes[me]
        {
            *l = left;
            *r = right;
        }
        me
    }
    let mut nodes = Vec::new();
    grow(x, indices, gradients, hessians, params, 0, &mut nodes);
    RegTree { nodes }
}

struct Candidate {
    split: HistogramSplit,
    counter: usize,
    node: usize,
    depth: usize,
    indices: Vec<usize>,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.split.gain == other.split.gain && self.counter == other.counter
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap: highest gain first, earliest-created leaf on ties
        self.split
            .gain
            .total_cmp(&other.split.gain)
            .then(other.counter.cmp(&self.counter))
    }
}

/// Best-first leaf-wise growth: repeatedly split the leaf with the
/// highest histogram gain, stopping at `num_leaves` or when no
/// positive-gain split remains. Depth never exceeds `max_depth`.
pub fn grow_tree_leaf_wise(
    binned: &BinnedMatrix,
    indices: &[usize],
    gradients: &[f64],
    hessians: &[f64],
    params: &BoostParams,
) -> RegTree {
    let mut nodes = Vec::new();
    let (gs, hs) = sums(indices, gradients, hessians);
    nodes.push(Node::Leaf {
        value: leaf_value(gs, hs, params.lambda),
    });
    let mut heap = BinaryHeap::new();
    let mut counter = 0usize;
    let push_candidate = |heap: &mut BinaryHeap<Candidate>,
                          counter: &mut usize,
                          node: usize,
                          depth: usize,
                          indices: Vec<usize>| {
        if depth >= params.max_depth {
            return;
        }
        if let Some(split) =
            best_split_histogram(binned, &indices, gradients, hessians, params.lambda)
        {
            heap.push(Candidate {
                split,
                counter: *counter,
                node,
                depth,
                indices,
            });
            *counter += 1;
        }
    };
    push_candidate(&mut heap, &mut counter, 0, 0, indices.to_vec());

    let mut n_leaves = 1;
    while n_leaves < params.num_leaves {
        let Some(cand) = heap.pop() else {
            break;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = cand
            .indices
            .iter()
            .partition(|&&i| binned.bin_of(i, cand.split.feature) <= cand.split.bin);
        let (gl, hl) = sums(&left_idx, gradients, hessians);
        let (gr, hr) = sums(&right_idx, gradients, hessians);
        let left = nodes.len();
        nodes.push(Node::Leaf {
            value: leaf_value(gl, hl, params.lambda),
        });
        let right = nodes.len();
        nodes.push(Node::Leaf {
            value: leaf_value(gr, hr, params.lambda),
        });
        nodes[cand.node] = Node::Split {
            feature: cand.split.feature,
            threshold: cand.split.threshold,
            left,
            right,
        };
        n_leaves += 1;
        push_candidate(&mut heap, &mut counter, left, cand.depth + 1, left_idx);
        push_candidate(&mut heap, &mut counter, right, cand.depth + 1, right_idx);
    }
    RegTree { nodes }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    /// Initial log-odds of the training prevalence.
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegTree>,
    /// Training log-loss before any tree and after each round.
    pub loss_trace: Vec<f64>,
}

fn mean_log_loss(raw: &[f64], y: &[f64]) -> f64 {
    let n = raw.len() as f64;
    raw.iter()
        .zip(y)
        .map(|(&f, &yi)| {
            let log1p_exp = if f > 0.0 {
                (1.0 + (-f).exp()).ln()
            } else {
                -f + (1.0 + f.exp()).ln()
            };
            if yi == 1.0 {
                log1p_exp
            } else {
                f + log1p_exp
            }
        })
        .sum::<f64>()
        / n
}

/// Additive log-loss boosting with g = p - y, h = p(1-p). Both classes
/// must be present (enforced by the caller).
pub fn fit(train: &LabeledDataset, params: &BoostParams) -> BoostModel {
    let n = train.n_rows();
    let y: Vec<f64> = train.labels.iter().map(|l| l.0 as f64).collect();
    let prevalence = y.iter().sum::<f64>() / n as f64;
    let base_score = (prevalence / (1.0 - prevalence)).ln();
    let indices: Vec<usize> = (0..n).collect();
    let binned = (params.growth == GrowthStrategy::LeafWise)
        .then(|| BinnedMatrix::from_matrix(&train.features, params.n_bins));

    let mut raw = vec![base_score; n];
    let mut trees = Vec::with_capacity(params.n_rounds);
    let mut loss_trace = vec![mean_log_loss(&raw, &y)];
    let mut gradients = vec![0.0; n];
    let mut hessians = vec![0.0; n];
    for _ in 0..params.n_rounds {
        for i in 0..n {
            let p = sigmoid(raw[i]);
            gradients[i] = p - y[i];
            hessians[i] = p * (1.0 - p);
        }
        let tree = match &binned {
            Some(b) => grow_tree_leaf_wise(b, &indices, &gradients, &hessians, params),
            None => grow_tree_level_wise(&train.features, &indices, &gradients, &hessians, params),
        };
        for (i, row) in train.features.rows().enumerate() {
            raw[i] += params.learning_rate * tree.predict_row(row);
        }
        trees.push(tree);
        loss_trace.push(mean_log_loss(&raw, &y));
    }
    BoostModel {
        base_score,
        learning_rate: params.learning_rate,
        trees,
        loss_trace,
    }
}

pub fn score(model: &BoostModel, features: &FeatureMatrix) -> Vec<f64> {
    features
        .rows()
        .map(|row| {
            let raw = model.base_score
                + model.learning_rate * model.trees.iter().map(|t| t.predict_row(row)).sum::<f64>();
            sigmoid(raw)
        })
        .collect()
}
