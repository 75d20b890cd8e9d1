//! Shared numeric containers: the encoded feature matrix and the labeled
//! dataset consumed by sampling and the classifiers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::DefaultLabel;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DataError {
    #[error("feature matrix contains a non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("labels length {labels} does not match row count {rows}")]
    LabelLengthMismatch { labels: usize, rows: usize },
}

/// Dense row-major matrix of finite reals with named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    column_names: Vec<String>,
    values: Vec<f64>,
    n_rows: usize,
}

impl FeatureMatrix {
    /// Builds a matrix from per-row vectors, checking shape, uniqueness of
    /// column names, and finiteness of every entry.
    pub fn new(column_names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, DataError> {
        let d = column_names.len();
        for (i, a) in column_names.iter().enumerate() {
            if column_names[i + 1..].contains(a) {
                return Err(DataError::DuplicateColumn(a.clone()));
            }
        }
        let mut values = Vec::with_capacity(rows.len() * d);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(DataError::RaggedRow {
                    row: r,
                    got: row.len(),
                    expected: d,
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(DataError::NonFinite { row: r, col: c });
                }
                values.push(v);
            }
        }
        Ok(FeatureMatrix {
            column_names,
            values,
            n_rows: rows.len(),
        })
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let d = self.n_cols();
        &self.values[r * d..(r + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_cols().max(1))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.n_cols() + c]
    }

    /// New matrix holding the given subset of rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let d = self.n_cols();
        let mut values = Vec::with_capacity(indices.len() * d);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            column_names: self.column_names.clone(),
            values,
            n_rows: indices.len(),
        }
    }

    /// Appends extra rows; each must have the right width and be finite.
    pub fn append_rows(&mut self, rows: &[Vec<f64>]) -> Result<(), DataError> {
        let d = self.n_cols();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(DataError::RaggedRow {
                    row: self.n_rows + r,
                    got: row.len(),
                    expected: d,
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(DataError::NonFinite {
                        row: self.n_rows + r,
                        col: c,
                    });
                }
            }
        }
        for row in rows {
            self.values.extend_from_slice(row);
        }
        self.n_rows += rows.len();
        Ok(())
    }
}

/// Encoded feature matrix paired with one binary label per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub features: FeatureMatrix,
    pub labels: Vec<DefaultLabel>,
}

impl LabeledDataset {
    pub fn new(features: FeatureMatrix, labels: Vec<DefaultLabel>) -> Result<Self, DataError> {
        if labels.len() != features.n_rows() {
            return Err(DataError::LabelLengthMismatch {
                labels: labels.len(),
                rows: features.n_rows(),
            });
        }
        Ok(LabeledDataset { features, labels })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|l| l.0 == 1).count();
        (self.labels.len() - pos, pos)
    }

    pub fn select(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}
