//! Seven native classifiers behind one contract: fit on a labeled
//! dataset, emit a continuous default score in [0,1] per row.

pub mod boost;
pub mod forest;
pub mod knn;
pub mod logistic;
pub mod svm;
pub mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{FeatureMatrix, LabeledDataset};
use crate::schema::DefaultLabel;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training set contains a single class")]
    SingleClassTrainingSet,
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparameters(String),
    #[error("feature columns do not match training columns (expected {expected:?}, got {got:?})")]
    ColumnMismatch {
        expected: Vec<String>,
        got: Vec<String>,
    },
    #[error("empty node")]
    EmptyNode,
    #[error("model file error: {0}")]
    Persistence(String),
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            learning_rate: 0.1,
            epochs: 500,
            l2: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvmKernel {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// RBF curvature; `None` means 1/d, resolved at fit time.
    pub gamma: Option<f64>,
    pub epochs: usize,
    pub kernel: SvmKernel,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            gamma: None,
            epochs: 5,
            kernel: SvmKernel::Rbf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_gain: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 8,
            min_samples_split: 2,
            min_gain: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree: TreeParams,
    /// Features considered per split; `None` means ceil(sqrt(d)).
    pub feature_subsample: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            tree: TreeParams::default(),
            feature_subsample: None,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthStrategy {
    LevelWise,
    LeafWise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub num_leaves: usize,
    pub lambda: f64,
    pub n_bins: usize,
    pub growth: GrowthStrategy,
}

impl BoostParams {
    pub fn level_wise() -> Self {
        BoostParams {
            n_rounds: 100,
            learning_rate: 0.1,
            max_depth: 6,
            num_leaves: 31,
            lambda: 1.0,
            n_bins: 255,
            growth: GrowthStrategy::LevelWise,
        }
    }

    pub fn leaf_wise() -> Self {
        BoostParams {
            growth: GrowthStrategy::LeafWise,
            ..BoostParams::level_wise()
        }
    }
}

/// Which classifier to fit, with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Logistic(LogisticParams),
    Svm(SvmParams),
    Knn(KnnParams),
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    XgbBoost(BoostParams),
    LgbmBoost(BoostParams),
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Logistic(_) => "logistic",
            ModelKind::Svm(_) => "svm",
            ModelKind::Knn(_) => "knn",
            ModelKind::DecisionTree(_) => "decision_tree",
            ModelKind::RandomForest(_) => "random_forest",
            ModelKind::XgbBoost(_) => "xgb_boost",
            ModelKind::LgbmBoost(_) => "lgbm_boost",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ModelKind,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        ClassifierSpec { kind, seed }
    }

    /// All seven kinds with their default hyperparameters.
    pub fn defaults(seed: u64) -> Vec<ClassifierSpec> {
        vec![
            ClassifierSpec::new(ModelKind::Logistic(LogisticParams::default()), seed),
            ClassifierSpec::new(ModelKind::Svm(SvmParams::default()), seed),
            ClassifierSpec::new(ModelKind::Knn(KnnParams::default()), seed),
            ClassifierSpec::new(ModelKind::DecisionTree(TreeParams::default()), seed),
            ClassifierSpec::new(ModelKind::RandomForest(ForestParams::default()), seed),
            ClassifierSpec::new(ModelKind::XgbBoost(BoostParams::level_wise()), seed),
            ClassifierSpec::new(ModelKind::LgbmBoost(BoostParams::leaf_wise()), seed),
        ]
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidHyperparameters(msg));
        match &self.kind {
            ModelKind::Logistic(p) => {
                if p.learning_rate <= 0.0 {
                    return bad(format!(
                        "learning_rate must be positive, got {}",
                        p.learning_rate
                    ));
                }
                if p.epochs < 1 {
                    return bad("epochs must be at least 1".to_string());
                }
                if p.l2 < 0.0 {
                    return bad(format!("l2 must be non-negative, got {}", p.l2));
                }
            }
            ModelKind::Svm(p) => {
                if p.c <= 0.0 {
                    return bad(format!("c must be positive, got {}", p.c));
                }
                if let Some(g) = p.gamma {
                    if g <= 0.0 {
                        return bad(format!("gamma must be positive, got {g}"));
                    }
                }
                if p.epochs < 1 {
                    return bad("epochs must be at least 1".to_string());
                }
            }
            ModelKind::Knn(p) => {
                if p.k < 1 {
                    return bad("k must be at least 1".to_string());
                }
            }
            ModelKind::DecisionTree(p) => Self::validate_tree(p)?,
            ModelKind::RandomForest(p) => {
                if p.n_trees < 1 {
                    return bad("n_trees must be at least 1".to_string());
                }
                Self::validate_tree(&p.tree)?;
            }
            ModelKind::XgbBoost(p) | ModelKind::LgbmBoost(p) => {
                if !(p.learning_rate > 0.0 && p.learning_rate <= 1.0) {
                    return bad(format!(
                        "learning_rate must be in (0,1], got {}",
                        p.learning_rate
                    ));
                }
                if p.max_depth < 1 {
                    return bad("max_depth must be at least 1".to_string());
                }
                if p.n_bins < 2 {
                    return bad(format!("n_bins must be at least 2, got {}", p.n_bins));
                }
                if p.lambda < 0.0 {
                    return bad(format!("lambda must be non-negative, got {}", p.lambda));
                }
                if p.num_leaves < 1 {
                    return bad("num_leaves must be at least 1".to_string());
                }
                if p.growth == GrowthStrategy::LeafWise {
                    let cap = 1usize << p.max_depth.min(63);
                    if p.num_leaves > cap {
                        return bad(format!(
                            "num_leaves = {} exceeds 2^max_depth = {cap}",
                            p.num_leaves
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_tree(p: &TreeParams) -> Result<(), ModelError> {
        if p.max_depth < 1 {
            return Err(ModelError::InvalidHyperparameters(
                "max_depth must be at least 1".to_string(),
            ));
        }
        if p.min_gain < 0.0 {
            return Err(ModelError::InvalidHyperparameters(format!(
                "min_gain must be non-negative, got {}",
                p.min_gain
            )));
        }
        Ok(())
    }
}

/// Per-feature z-score statistics frozen at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &FeatureMatrix) -> Standardizer {
        let d = x.n_cols();
        let n = x.n_rows() as f64;
        let mut means = vec![0.0; d];
        for row in x.rows() {
            for (m, &v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut vars = vec![0.0; d];
        for row in x.rows() {
            for ((s, &v), &m) in vars.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let stds = vars
            .iter()
            .map(|&v| {
                let s = (v / n).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0 // constant column: pass through centered
                }
            })
            .collect();
        Standardizer { means, stds }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((&v, &m), &s)| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, x: &FeatureMatrix) -> Vec<Vec<f64>> {
        x.rows().map(|r| self.transform_row(r)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelPayload {
    Logistic(logistic::LogisticModel),
    Svm(svm::SvmModel),
    Knn(knn::KnnModel),
    DecisionTree(tree::ClassTree),
    RandomForest(forest::ForestModel),
    Boost(boost::BoostModel),
}

/// A fitted, immutable classifier. Scoring never mutates the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: String,
    pub spec: ClassifierSpec,
    pub feature_names: Vec<String>,
    pub payload: ModelPayload,
}

fn check_two_classes(labels: &[DefaultLabel]) -> Result<(), ModelError> {
    let pos = labels.iter().filter(|l| l.0 == 1).count();
    if pos == 0 || pos == labels.len() {
        return Err(ModelError::SingleClassTrainingSet);
    }
    Ok(())
}

/// Fits a classifier. Deterministic for a fixed spec (including seed).
pub fn fit(spec: &ClassifierSpec, train: &LabeledDataset) -> Result<TrainedModel, ModelError> {
    spec.validate()?;
    if train.n_rows() == 0 || train.features.n_cols() == 0 {
        return Err(ModelError::InvalidHyperparameters(
            "training set must be non-empty with at least one column".to_string(),
        ));
    }
    check_two_classes(&train.labels)?;
    let payload = match &spec.kind {
        ModelKind::Logistic(p) => ModelPayload::Logistic(logistic::fit(train, p)),
        ModelKind::Svm(p) => ModelPayload::Svm(svm::fit(train, p, spec.seed)),
        ModelKind::Knn(p) => {
            if p.k > train.n_rows() {
                return Err(ModelError::InvalidHyperparameters(format!(
                    "k = {} exceeds training size {}",
                    p.k,
                    train.n_rows()
                )));
            }
            ModelPayload::Knn(knn::fit(train, p))
        }
        ModelKind::DecisionTree(p) => ModelPayload::DecisionTree(tree::fit(train, p)),
        ModelKind::RandomForest(p) => ModelPayload::RandomForest(forest::fit(train, p, spec.seed)),
        ModelKind::XgbBoost(p) | ModelKind::LgbmBoost(p) => {
            ModelPayload::Boost(boost::fit(train, p))
        }
    };
    Ok(TrainedModel {
        kind: spec.kind.name().to_string(),
        spec: *spec,
        feature_names: train.features.column_names().to_vec(),
        payload,
    })
}

/// Scores each row with the fitted model's default probability.
pub fn score(model: &TrainedModel, features: &FeatureMatrix) -> Result<Vec<f64>, ModelError> {
    if features.column_names() != model.feature_names.as_slice() {
        return Err(ModelError::ColumnMismatch {
            expected: model.feature_names.clone(),
            got: features.column_names().to_vec(),
        });
    }
    let scores = match &model.payload {
        ModelPayload::Logistic(m) => logistic::score(m, features),
        ModelPayload::Svm(m) => svm::score(m, features),
        ModelPayload::Knn(m) => knn::score(m, features),
        ModelPayload::DecisionTree(m) => tree::score(m, features),
        ModelPayload::RandomForest(m) => forest::score(m, features),
        ModelPayload::Boost(m) => boost::score(m, features),
    };
    debug_assert!(scores
        .iter()
        .all(|s| s.is_finite() && (0.0..=1.0).contains(s)));
    Ok(scores)
}

/// Binarizes scores: label 1 iff score >= threshold.
pub fn predict(
    model: &TrainedModel,
    features: &FeatureMatrix,
    threshold: f64,
) -> Result<Vec<DefaultLabel>, ModelError> {
    Ok(score(model, features)?
        .into_iter()
        .map(|s| DefaultLabel((s >= threshold) as u8))
        .collect())
}

/// Serializes the model as a self-describing JSON document.
pub fn to_json(model: &TrainedModel) -> String {
    serde_json::to_string_pretty(model).expect("model serialization cannot fail")
}

pub fn from_json(text: &str) -> Result<TrainedModel, ModelError> {
    serde_json::from_str(text).map_err(|e| ModelError::Persistence(e.to_string()))
}
