//! Batch pipeline commands: generate, prepare, train, evaluate, compare.
//! Each command is a plain function over a parsed argument struct so the
//! binary stays a thin dispatcher and tests can call commands directly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::data::{DataError, FeatureMatrix, LabeledDataset};
use crate::ingest::{self, EncodingMap, IngestError, CATEGORICAL_COLUMNS, DEFAULT_DROP_COLUMNS};
use crate::metrics::{self, ClassificationReport, ConfusionMatrix, MetricsError, RocCurve};
use crate::models::{
    self, BoostParams, ClassifierSpec, ForestParams, GrowthStrategy, KnnParams, LogisticParams,
    ModelError, ModelKind, SvmKernel, SvmParams, TrainedModel, TreeParams,
};
use crate::sampling::{self, SamplingError, SmoteConfig, SplitConfig};
use crate::schema::{parse_status, DefaultLabel, StatusCode};

/// Process exit codes: 0 success, 2 usage/validation, 3 data, 4 internal.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::NoOverlap => CliError::Data(e.to_string()),
            IngestError::Csv(_) | IngestError::Data(_) => CliError::Data(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SamplingError> for CliError {
    fn from(e: SamplingError) -> Self {
        match e {
            SamplingError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidHyperparameters(_) | ModelError::ColumnMismatch { .. } => {
                CliError::Usage(e.to_string())
            }
            ModelError::SingleClassTrainingSet | ModelError::Persistence(_) => {
                CliError::Data(e.to_string())
            }
            ModelError::EmptyNode => CliError::Internal(e.to_string()),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

fn default_seed() -> u64 {
    42
}
fn default_label_threshold() -> String {
    "2".to_string()
}
fn default_drop_columns() -> Vec<String> {
    DEFAULT_DROP_COLUMNS.iter().map(|s| s.to_string()).collect()
}
fn default_categorical_columns() -> Vec<String> {
    CATEGORICAL_COLUMNS.iter().map(|s| s.to_string()).collect()
}
fn default_threshold() -> f64 {
    0.5
}
fn default_train_fraction() -> f64 {
    0.7
}
fn default_true() -> bool {
    true
}
fn default_smote_k() -> usize {
    5
}
fn default_smote_ratio() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSection {
    pub train_fraction: f64,
    pub stratified: bool,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            train_fraction: default_train_fraction(),
            stratified: default_true(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoteSection {
    pub k: usize,
    pub ratio: f64,
}

impl Default for SmoteSection {
    fn default() -> Self {
        SmoteSection {
            k: default_smote_k(),
            ratio: default_smote_ratio(),
        }
    }
}

/// One model entry in the config: a kind name plus optional
/// hyperparameter overrides on top of that kind's defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSection {
    pub kind: String,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub l2: Option<f64>,
    pub c: Option<f64>,
    pub gamma: Option<f64>,
    pub kernel: Option<String>,
    pub k: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: Option<usize>,
    pub min_gain: Option<f64>,
    pub n_trees: Option<usize>,
    pub feature_subsample: Option<usize>,
    pub bootstrap: Option<bool>,
    pub n_rounds: Option<usize>,
    pub num_leaves: Option<usize>,
    pub lambda: Option<f64>,
    pub n_bins: Option<usize>,
}

impl ModelSection {
    pub fn named(kind: &str) -> ModelSection {
        ModelSection {
            kind: kind.to_string(),
            ..ModelSection::default()
        }
    }

    pub fn to_spec(&self, seed: u64) -> Result<ClassifierSpec, CliError> {
        let kind = match self.kind.as_str() {
            "logistic" => {
                let mut p = LogisticParams::default();
                if let Some(v) = self.learning_rate {
                    p.learning_rate = v;
                }
                if let Some(v) = self.epochs {
                    p.epochs = v;
                }
                if let Some(v) = self.l2 {
                    p.l2 = v;
                }
                ModelKind::Logistic(p)
            }
            "svm" => {
                let mut p = SvmParams::default();
                if let Some(v) = self.c {
                    p.c = v;
                }
                if self.gamma.is_some() {
                    p.gamma = self.gamma;
                }
                if let Some(v) = self.epochs {
                    p.epochs = v;
                }
                if let Some(k) = &self.kernel {
                    p.kernel = match k.as_str() {
                        "linear" => SvmKernel::Linear,
                        "rbf" => SvmKernel::Rbf,
                        other => return Err(CliError::Usage(format!("unknown kernel {other:?}"))),
                    };
                }
                ModelKind::Svm(p)
            }
            "knn" => {
                let mut p = KnnParams::default();
                if let Some(v) = self.k {
                    p.k = v;
                }
                ModelKind::Knn(p)
            }
            "decision_tree" => ModelKind::DecisionTree(self.tree_params()),
            "random_forest" => {
                let mut p = ForestParams {
                    tree: self.tree_params(),
                    ..ForestParams::default()
                };
                if let Some(v) = self.n_trees {
                    p.n_trees = v;
                }
                if self.feature_subsample.is_some() {
                    p.feature_subsample = self.feature_subsample;
                }
                if let Some(v) = self.bootstrap {
                    p.bootstrap = v;
                }
                ModelKind::RandomForest(p)
            }
            "xgb_boost" => ModelKind::XgbBoost(self.boost_params(GrowthStrategy::LevelWise)),
            "lgbm_boost" => ModelKind::LgbmBoost(self.boost_params(GrowthStrategy::LeafWise)),
            other => {
                return Err(CliError::Usage(format!(
                    "unknown model kind {other:?} (expected one of logistic, svm, knn, \
                     decision_tree, random_forest, xgb_boost, lgbm_boost)"
                )))
            }
        };
        let spec = ClassifierSpec::new(kind, seed);
        spec.validate()?;
        Ok(spec)
    }

    fn tree_params(&self) -> TreeParams {
        let mut p = TreeParams::default();
        if let Some(v) = self.max_depth {
            p.max_depth = v;
        }
        if let Some(v) = self.min_samples_split {
            p.min_samples_split = v;
        }
        if let Some(v) = self.min_gain {
            p.min_gain = v;
        }
        p
    }

    fn boost_params(&self, growth: GrowthStrategy) -> BoostParams {
        let mut p = match growth {
            GrowthStrategy::LevelWise => BoostParams::level_wise(),
            GrowthStrategy::LeafWise => BoostParams::leaf_wise(),
        };
        if let Some(v) = self.n_rounds {
            p.n_rounds = v;
        }
        if let Some(v) = self.learning_rate {
            p.learning_rate = v;
        }
        if let Some(v) = self.max_depth {
            p.max_depth = v;
        }
        if let Some(v) = self.num_leaves {
            p.num_leaves = v;
        }
        if let Some(v) = self.lambda {
            p.lambda = v;
        }
        if let Some(v) = self.n_bins {
            p.n_bins = v;
        }
        p
    }
}

pub const ALL_MODEL_KINDS: [&str; 7] = [
    "logistic",
    "svm",
    "knn",
    "decision_tree",
    "random_forest",
    "xgb_boost",
    "lgbm_boost",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Minimum overdue status code that marks a customer as defaulted.
    pub label_threshold: String,
    pub drop_columns: Vec<String>,
    pub categorical_columns: Vec<String>,
    /// Classification cutoff applied to scores.
    pub threshold: f64,
    pub split: SplitSection,
    pub smote: SmoteSection,
    pub models: Vec<ModelSection>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: default_seed(),
            label_threshold: default_label_threshold(),
            drop_columns: default_drop_columns(),
            categorical_columns: default_categorical_columns(),
            threshold: default_threshold(),
            split: SplitSection::default(),
            smote: SmoteSection::default(),
            models: ALL_MODEL_KINDS
                .iter()
                .map(|k| ModelSection::named(k))
                .collect(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
        match path {
            None => Ok(PipelineConfig::default()),
            Some(p) => {
                let text = String::from_utf8(read_file(p)?)
                    .map_err(|e| CliError::Usage(format!("config is not UTF-8: {e}")))?;
                let mut cfg: PipelineConfig = toml::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("bad config: {e}")))?;
                if cfg.models.is_empty() {
                    cfg.models = PipelineConfig::default().models;
                }
                Ok(cfg)
            }
        }
    }

    pub fn label_threshold_status(&self) -> Result<StatusCode, CliError> {
        let status =
            parse_status(&self.label_threshold).map_err(|e| CliError::Usage(e.to_string()))?;
        if status.delinquency_level().is_none() {
            return Err(CliError::Usage(format!(
                "label_threshold must be a delinquency code 0-5, got {:?}",
                self.label_threshold
            )));
        }
        Ok(status)
    }

    pub fn split_config(&self) -> SplitConfig {
        SplitConfig {
            train_fraction: self.split.train_fraction,
            seed: self.seed,
            stratified: self.split.stratified,
        }
    }

    pub fn smote_config(&self) -> SmoteConfig {
        SmoteConfig {
            k_neighbors: self.smote.k,
            target_ratio: self.smote.ratio,
            seed: self.seed,
        }
    }
}

// ---------------------------------------------------------------------------
// Dataset and model files
// ---------------------------------------------------------------------------

/// Writes a prepared dataset as CSV: feature columns plus a final `label`
/// column. Floats use the shortest representation that round-trips.
pub fn dataset_to_csv(data: &LabeledDataset) -> String {
    let mut out = String::new();
    out.push_str(&data.features.column_names().join(","));
    out.push_str(",label\n");
    for (row, label) in data.features.rows().zip(&data.labels) {
        for v in row {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{}", label.0);
    }
    out
}

pub fn dataset_from_csv(text: &str) -> Result<LabeledDataset, CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Data("empty dataset file".to_string()))?;
    let mut names: Vec<String> = header.split(',').map(|s| s.to_string()).collect();
    if names.last().map(String::as_str) != Some("label") {
        return Err(CliError::Data(
            "dataset file must end with a label column".to_string(),
        ));
    }
    names.pop();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() + 1 {
            return Err(CliError::Data(format!(
                "dataset row {} has {} fields, expected {}",
                i + 2,
                fields.len(),
                names.len() + 1
            )));
        }
        let mut row = Vec::with_capacity(names.len());
        for f in &fields[..names.len()] {
            row.push(f.parse::<f64>().map_err(|e| {
                CliError::Data(format!("dataset row {}: bad number {f:?}: {e}", i + 2))
            })?);
        }
        let label: u8 = fields[names.len()]
            .parse()
            .map_err(|e| CliError::Data(format!("dataset row {}: bad label: {e}", i + 2)))?;
        if label > 1 {
            return Err(CliError::Data(format!(
                "dataset row {}: label must be 0 or 1",
                i + 2
            )));
        }
        rows.push(row);
        labels.push(DefaultLabel(label));
    }
    let features = FeatureMatrix::new(names, rows)?;
    Ok(LabeledDataset::new(features, labels)?)
}

fn write_out(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, bytes)?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// Evaluation plumbing shared by train / evaluate / compare
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    /// `None` when the evaluation slice contains a single class.
    pub auc: Option<f64>,
    pub threshold: f64,
    pub confusion: ConfusionMatrix,
    pub report: ClassificationReport,
}

pub fn evaluate_scores(
    y_true: &[DefaultLabel],
    scores: &[f64],
    threshold: f64,
) -> Result<(Evaluation, Option<RocCurve>), CliError> {
    let y_pred: Vec<DefaultLabel> = scores
        .iter()
        .map(|&s| DefaultLabel((s >= threshold) as u8))
        .collect();
    let confusion = metrics::confusion(y_true, &y_pred)?;
    let report = metrics::classification_report(y_true, &y_pred)?;
    let curve = match metrics::roc_curve(y_true, scores) {
        Ok(c) => Some(c),
        Err(MetricsError::SingleClassInput) => None,
        Err(e) => return Err(e.into()),
    };
    let auc = curve.as_ref().map(metrics::auc);
    Ok((
        Evaluation {
            accuracy: metrics::accuracy(&confusion),
            auc,
            threshold,
            confusion,
            report,
        },
        curve,
    ))
}

fn split_hash(train: &[usize], test: &[usize]) -> String {
    let mut hasher = Sha256::new();
    for i in train {
        hasher.update(i.to_le_bytes());
    }
    hasher.update([0xff]);
    for i in test {
        hasher.update(i.to_le_bytes());
    }
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub model: String,
    pub seed: u64,
    /// Hash of the train/test index partition; equal hashes mean the
    /// exact same rows were used.
    pub split_hash: String,
    pub train_rows: usize,
    /// Synthetic minority rows appended by SMOTE after the split; the
    /// test set never contains any.
    pub synthetic_rows: usize,
    pub test_rows: usize,
    pub evaluation: Evaluation,
}

pub struct TrainOutcome {
    pub model: TrainedModel,
    pub report: TrainReport,
    pub roc: Option<RocCurve>,
    pub holdout: LabeledDataset,
}

/// Shared train path: stratified split, SMOTE on the training part only,
/// fit, evaluate on the untouched holdout.
pub fn train_and_evaluate(
    data: &LabeledDataset,
    spec: &ClassifierSpec,
    cfg: &PipelineConfig,
) -> Result<TrainOutcome, CliError> {
    let indices = sampling::stratified_split_indices(&data.labels, &cfg.split_config())?;
    let train = data.select(&indices.train);
    let test = data.select(&indices.test);
    let balanced = sampling::smote(&train, &cfg.smote_config())?;
    let synthetic_rows = balanced.n_rows() - train.n_rows();
    let model = models::fit(spec, &balanced)?;
    let scores = models::score(&model, &test.features)?;
    let (evaluation, roc) = evaluate_scores(&test.labels, &scores, cfg.threshold)?;
    let report = TrainReport {
        model: spec.kind.name().to_string(),
        seed: spec.seed,
        split_hash: split_hash(&indices.train, &indices.test),
        train_rows: balanced.n_rows(),
        synthetic_rows,
        test_rows: test.n_rows(),
        evaluation,
    };
    Ok(TrainOutcome {
        model,
        report,
        roc,
        holdout: test,
    })
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

pub fn cmd_generate(
    rows: usize,
    default_rate: f64,
    seed: u64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let (app, credit) = ingest::generate_synthetic(rows, default_rate, seed)?;
    let app_path = write_out(out_dir, "application.csv", &app)?;
    let credit_path = write_out(out_dir, "credit.csv", &credit)?;
    println!("wrote {} and {}", app_path.display(), credit_path.display());
    Ok(())
}

pub fn prepare_dataset(
    application_csv: &[u8],
    credit_csv: &[u8],
    cfg: &PipelineConfig,
) -> Result<(LabeledDataset, EncodingMap), CliError> {
    let apps = ingest::parse_applications(application_csv)?;
    let credit = ingest::parse_credit(credit_csv)?;
    let table = ingest::merge_and_label(
        &apps,
        &credit,
        &cfg.drop_columns,
        cfg.label_threshold_status()?,
    )?;
    let categorical: Vec<String> = cfg
        .categorical_columns
        .iter()
        .filter(|c| table.columns.contains(c))
        .cloned()
        .collect();
    let encoder = ingest::fit_encoder(&table, &categorical)?;
    let features = ingest::encode(&table, &encoder)?;
    let data = LabeledDataset::new(features, table.labels.clone())?;
    let (neg, pos) = data.class_counts();
    if neg == 0 || pos == 0 {
        return Err(CliError::Data(
            "prepared dataset contains a single class".to_string(),
        ));
    }
    Ok((data, encoder))
}

pub fn cmd_prepare(
    application_path: &Path,
    credit_path: &Path,
    cfg: &PipelineConfig,
    out_dir: &Path,
) -> Result<(), CliError> {
    let app = read_file(application_path)?;
    let credit = read_file(credit_path)?;
    let (data, encoder) = prepare_dataset(&app, &credit, cfg)?;
    write_out(out_dir, "dataset.csv", dataset_to_csv(&data).as_bytes())?;
    let encoder_json =
        serde_json::to_string_pretty(&encoder).map_err(|e| CliError::Internal(e.to_string()))?;
    write_out(out_dir, "encoder.json", encoder_json.as_bytes())?;
    let (neg, pos) = data.class_counts();
    println!(
        "rows: {}\nfeatures: {}\nclass balance: {} good / {} default ({:.2}% default)",
        data.n_rows(),
        data.features.n_cols(),
        neg,
        pos,
        100.0 * pos as f64 / data.n_rows() as f64
    );
    Ok(())
}

pub fn cmd_train(
    dataset_path: &Path,
    model_kind: &str,
    cfg: &PipelineConfig,
    out_dir: &Path,
) -> Result<(), CliError> {
    let data = dataset_from_csv(&String::from_utf8_lossy(&read_file(dataset_path)?))?;
    let section = cfg
        .models
        .iter()
        .find(|m| m.kind == model_kind)
        .cloned()
        .unwrap_or_else(|| ModelSection::named(model_kind));
    let spec = section.to_spec(cfg.seed)?;
    let outcome = train_and_evaluate(&data, &spec, cfg)?;
    let name = spec.kind.name();
    write_out(
        out_dir,
        &format!("model_{name}.json"),
        models::to_json(&outcome.model).as_bytes(),
    )?;
    let report_json = serde_json::to_string_pretty(&outcome.report)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    write_out(
        out_dir,
        &format!("report_{name}.json"),
        report_json.as_bytes(),
    )?;
    if let Some(curve) = &outcome.roc {
        write_out(
            out_dir,
            &format!("roc_{name}.csv"),
            metrics::roc_to_csv(curve).as_bytes(),
        )?;
    }
    write_out(
        out_dir,
        "holdout.csv",
        dataset_to_csv(&outcome.holdout).as_bytes(),
    )?;
    println!("{}", render_evaluation(name, &outcome.report.evaluation));
    Ok(())
}

pub fn cmd_evaluate(
    model_path: &Path,
    dataset_path: &Path,
    threshold: f64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let model = models::from_json(&String::from_utf8_lossy(&read_file(model_path)?))?;
    let data = dataset_from_csv(&String::from_utf8_lossy(&read_file(dataset_path)?))?;
    let scores = models::score(&model, &data.features)?;
    let (evaluation, roc) = evaluate_scores(&data.labels, &scores, threshold)?;
    let report_json =
        serde_json::to_string_pretty(&evaluation).map_err(|e| CliError::Internal(e.to_string()))?;
    write_out(out_dir, "eval_report.json", report_json.as_bytes())?;
    if let Some(curve) = &roc {
        write_out(out_dir, "roc.csv", metrics::roc_to_csv(curve).as_bytes())?;
    }
    println!("{}", render_evaluation(&model.kind, &evaluation));
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoreboardRow {
    pub model: String,
    pub accuracy: Option<f64>,
    pub auc: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub error: Option<String>,
}

/// Per-model comparison on one shared split and one shared balanced
/// training set. Rows are sorted by accuracy descending; failed models
/// sink to the bottom with their error recorded.
pub struct Scoreboard {
    pub rows: Vec<ScoreboardRow>,
}

impl Scoreboard {
    pub fn to_csv(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:.6}"));
        let mut out = String::from("model,accuracy,auc,precision,recall,f1\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.model,
                fmt(r.accuracy),
                fmt(r.auc),
                fmt(r.precision),
                fmt(r.recall),
                fmt(r.f1)
            );
        }
        out
    }

    pub fn render_table(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("    NA  ".to_string(), |x| format!("{x:.6}"));
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:>9} {:>9} {:>9} {:>9} {:>9}",
            "model", "accuracy", "auc", "precision", "recall", "f1"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<16} {:>9} {:>9} {:>9} {:>9} {:>9}",
                r.model,
                fmt(r.accuracy),
                fmt(r.auc),
                fmt(r.precision),
                fmt(r.recall),
                fmt(r.f1)
            );
            if let Some(err) = &r.error {
                let _ = writeln!(out, "    failed: {err}");
            }
        }
        out
    }
}

/// Per-model artifacts produced by a comparison run.
pub type ModelDetail = (String, TrainReport, Option<RocCurve>);

pub fn compare_models(
    data: &LabeledDataset,
    cfg: &PipelineConfig,
) -> Result<(Scoreboard, Vec<ModelDetail>), CliError> {
    // one shared split and one shared SMOTE application for every model
    let indices = sampling::stratified_split_indices(&data.labels, &cfg.split_config())?;
    let train = data.select(&indices.train);
    let test = data.select(&indices.test);
    let balanced = sampling::smote(&train, &cfg.smote_config())?;
    let synthetic_rows = balanced.n_rows() - train.n_rows();
    let hash = split_hash(&indices.train, &indices.test);

    let mut rows = Vec::new();
    let mut details = Vec::new();
    for (i, section) in cfg.models.iter().enumerate() {
        // per-model seed derives deterministically from the global seed
        let seed = cfg.seed.wrapping_add(i as u64);
        let outcome: Result<_, CliError> = (|| {
            let spec = section.to_spec(seed)?;
            let model = models::fit(&spec, &balanced)?;
            let scores = models::score(&model, &test.features)?;
            let (evaluation, roc) = evaluate_scores(&test.labels, &scores, cfg.threshold)?;
            Ok((spec, evaluation, roc))
        })();
        match outcome {
            Ok((spec, evaluation, roc)) => {
                rows.push(ScoreboardRow {
                    model: spec.kind.name().to_string(),
                    accuracy: Some(evaluation.accuracy),
                    auc: evaluation.auc,
                    precision: Some(evaluation.report.class1.precision),
                    recall: Some(evaluation.report.class1.recall),
                    f1: Some(evaluation.report.class1.f1),
                    error: None,
                });
                details.push((
                    spec.kind.name().to_string(),
                    TrainReport {
                        model: spec.kind.name().to_string(),
                        seed,
                        split_hash: hash.clone(),
                        train_rows: balanced.n_rows(),
                        synthetic_rows,
                        test_rows: test.n_rows(),
                        evaluation,
                    },
                    roc,
                ));
            }
            Err(e) => rows.push(ScoreboardRow {
                model: section.kind.clone(),
                accuracy: None,
                auc: None,
                precision: None,
                recall: None,
                f1: None,
                error: Some(e.to_string()),
            }),
        }
    }
    if rows.iter().all(|r| r.error.is_some()) {
        return Err(CliError::Data("every model failed to train".to_string()));
    }
    rows.sort_by(|a, b| {
        b.accuracy
            .unwrap_or(-1.0)
            .partial_cmp(&a.accuracy.unwrap_or(-1.0))
            .unwrap()
            .then(a.model.cmp(&b.model))
    });
    Ok((Scoreboard { rows }, details))
}

pub fn cmd_compare(
    dataset_path: &Path,
    cfg: &PipelineConfig,
    out_dir: &Path,
) -> Result<(), CliError> {
    let data = dataset_from_csv(&String::from_utf8_lossy(&read_file(dataset_path)?))?;
    let (scoreboard, details) = compare_models(&data, cfg)?;
    write_out(out_dir, "scoreboard.csv", scoreboard.to_csv().as_bytes())?;
    for (name, report, roc) in &details {
        let report_json =
            serde_json::to_string_pretty(report).map_err(|e| CliError::Internal(e.to_string()))?;
        write_out(
            out_dir,
            &format!("report_{name}.json"),
            report_json.as_bytes(),
        )?;
        if let Some(curve) = roc {
            write_out(
                out_dir,
                &format!("roc_{name}.csv"),
                metrics::roc_to_csv(curve).as_bytes(),
            )?;
        }
    }
    print!("{}", scoreboard.render_table());
    Ok(())
}

fn render_evaluation(name: &str, e: &Evaluation) -> String {
    let auc = e.auc.map_or("NA".to_string(), |a| format!("{a:.6}"));
    format!(
        "model: {name}\naccuracy: {:.6}\nauc: {auc}\nclass 1: precision {:.6}  recall {:.6}  f1 {:.6}  (support {})\nclass 0: precision {:.6}  recall {:.6}  f1 {:.6}  (support {})\nconfusion: tp {} fp {} fn {} tn {}",
        e.accuracy,
        e.report.class1.precision,
        e.report.class1.recall,
        e.report.class1.f1,
        e.report.class1.support,
        e.report.class0.precision,
        e.report.class0.recall,
        e.report.class0.f1,
        e.report.class0.support,
        e.confusion.tp,
        e.confusion.fp,
        e.confusion.fn_,
        e.confusion.tn
    )
}
