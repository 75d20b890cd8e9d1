//! From-scratch imbalanced-classification toolkit for credit-card
//! default prediction: two-table CSV ingestion, label derivation, label
//! encoding, SMOTE oversampling, seven native classifiers, and ROC/AUC
//! evaluation behind a batch CLI.

pub mod cli;
pub mod data;
pub mod ingest;
pub mod metrics;
pub mod models;
pub mod sampling;
pub mod schema;

pub use data::{FeatureMatrix, LabeledDataset};
pub use schema::{DefaultLabel, StatusCode};
