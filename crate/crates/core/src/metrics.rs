//! Confusion-matrix metrics, ROC curve construction, trapezoidal AUC, and
//! the per-class classification report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::DefaultLabel;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("only one class present, curve undefined")]
    SingleClassInput,
    #[error("empty node")]
    EmptyNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

pub fn confusion(
    y_true: &[DefaultLabel],
    y_pred: &[DefaultLabel],
) -> Result<ConfusionMatrix, MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut cm = ConfusionMatrix {
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
    };
    for (t, p) in y_true.iter().zip(y_pred) {
        match (t.0, p.0) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            _ => cm.tn += 1,
        }
    }
    Ok(cm)
}

fn ratio(num: usize, den: usize) -> f64 {
    // zero denominators report 0 so degenerate folds never abort a comparison
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn precision(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.tp, cm.tp + cm.fp)
}

pub fn recall(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.tp, cm.tp + cm.fn_)
}

pub fn f1(cm: &ConfusionMatrix) -> f64 {
    let p = precision(cm);
    let r = recall(cm);
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.tp + cm.tn, cm.total())
}

/// ROC operating points, from (0,0) to (1,1), both coordinates
/// non-decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
}

/// Sweeps the decision threshold across distinct score values in
/// descending order. Rows sharing a score move together, so tied scores
/// contribute a single diagonal segment.
pub fn roc_curve(y_true: &[DefaultLabel], scores: &[f64]) -> Result<RocCurve, MetricsError> {
    if y_true.len() != scores.len() {
        return Err(MetricsError::LengthMismatch {
            left: y_true.len(),
            right: scores.len(),
        });
    }
    let n_pos = y_true.iter().filter(|l| l.0 == 1).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricsError::SingleClassInput);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));

    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if y_true[order[i]].0 == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }
    Ok(RocCurve { points })
}

/// Trapezoidal area under the curve.
pub fn auc(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// Metrics for one class treated as positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub class0: ClassMetrics,
    pub class1: ClassMetrics,
    pub accuracy: f64,
    pub total: usize,
}

pub fn classification_report(
    y_true: &[DefaultLabel],
    y_pred: &[DefaultLabel],
) -> Result<ClassificationReport, MetricsError> {
    let cm1 = confusion(y_true, y_pred)?;
    // class 0 as positive: swap roles
    let cm0 = ConfusionMatrix {
        tp: cm1.tn,
        fp: cm1.fn_,
        fn_: cm1.fp,
        tn: cm1.tp,
    };
    let class_metrics = |cm: &ConfusionMatrix| ClassMetrics {
        precision: precision(cm),
        recall: recall(cm),
        f1: f1(cm),
        support: cm.tp + cm.fn_,
    };
    Ok(ClassificationReport {
        class0: class_metrics(&cm0),
        class1: class_metrics(&cm1),
        accuracy: accuracy(&cm1),
        total: cm1.total(),
    })
}

/// Writes a curve as a two-column `fpr,tpr` CSV.
pub fn roc_to_csv(curve: &RocCurve) -> String {
    let mut out = String::from("fpr,tpr\n");
    for (fpr, tpr) in &curve.points {
        out.push_str(&format!("{fpr},{tpr}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(bits: &[u8]) -> Vec<DefaultLabel> {
        bits.iter().map(|&b| DefaultLabel(b)).collect()
    }

    #[test]
    fn confusion_hand_tally() {
        let cm = confusion(&labels(&[1, 0, 1, 0]), &labels(&[1, 0, 0, 0])).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 1,
                fp: 0,
                fn_: 1,
                tn: 2
            }
        );
    }

    #[test]
    fn perfect_prediction_has_no_errors() {
        let y = labels(&[1, 0, 1, 1, 0]);
        let cm = confusion(&y, &y).unwrap();
        assert_eq!(cm.fp, 0);
        assert_eq!(cm.fn_, 0);
        assert_eq!(precision(&cm), 1.0);
        assert_eq!(recall(&cm), 1.0);
        assert_eq!(f1(&cm), 1.0);
    }

    #[test]
    fn length_mismatch_and_empty_are_errors() {
        assert_eq!(
            confusion(&labels(&[1, 0, 1]), &labels(&[1, 0, 1, 0])),
            Err(MetricsError::LengthMismatch { left: 3, right: 4 })
        );
        assert_eq!(confusion(&[], &[]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn formula_hand_values() {
        let cm = ConfusionMatrix {
            tp: 8,
            fp: 2,
            fn_: 4,
            tn: 86,
        };
        assert!((precision(&cm) - 0.8).abs() < 1e-12);
        assert!((recall(&cm) - 2.0 / 3.0).abs() < 1e-12);
        assert!((f1(&cm) - 0.7272727272727273).abs() < 1e-12);
        assert!((accuracy(&cm) - 0.94).abs() < 1e-12);
    }

    #[test]
    fn zero_denominators_report_zero() {
        let cm = ConfusionMatrix {
            tp: 0,
            fp: 0,
            fn_: 3,
            tn: 7,
        };
        assert_eq!(precision(&cm), 0.0);
        assert_eq!(f1(&cm), 0.0);
    }

    #[test]
    fn roc_threshold_sweep_by_hand() {
        let curve = roc_curve(&labels(&[1, 0, 1, 0]), &[0.9, 0.8, 0.4, 0.2]).unwrap();
        assert_eq!(
            curve.points,
            vec![(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)]
        );
        assert!((auc(&curve) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn tied_scores_give_the_diagonal() {
        let curve = roc_curve(&labels(&[1, 0, 1, 0]), &[0.3; 4]).unwrap();
        assert_eq!(curve.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert!((auc(&curve) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_class_curve_is_undefined() {
        assert_eq!(
            roc_curve(&labels(&[1, 1]), &[0.1, 0.2]),
            Err(MetricsError::SingleClassInput)
        );
    }

    #[test]
    fn separating_scores_reach_auc_one() {
        let curve = roc_curve(&labels(&[0, 0, 1, 1]), &[0.1, 0.2, 0.8, 0.9]).unwrap();
        assert!((auc(&curve) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_matches_per_class_hand_values() {
        // 100 rows realizing tp=8 fp=2 fn=4 tn=86 for class 1
        let mut y_true = Vec::new();
        let mut y_pred = Vec::new();
        for (t, p, n) in [(1, 1, 8), (0, 1, 2), (1, 0, 4), (0, 0, 86)] {
            for _ in 0..n {
                y_true.push(DefaultLabel(t));
                y_pred.push(DefaultLabel(p));
            }
        }
        let rep = classification_report(&y_true, &y_pred).unwrap();
        assert!((rep.class1.precision - 0.8).abs() < 1e-12);
        assert!((rep.class1.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((rep.class1.f1 - 0.7272727272727273).abs() < 1e-12);
        assert_eq!(rep.class1.support, 12);
        assert_eq!(rep.class0.support, 88);
        assert!((rep.accuracy - 0.94).abs() < 1e-12);
    }

    #[test]
    fn all_negative_predictions_zero_class1_recall() {
        let rep = classification_report(&labels(&[1, 0, 1, 0]), &labels(&[0, 0, 0, 0])).unwrap();
        assert_eq!(rep.class1.recall, 0.0);
        assert_eq!(rep.class0.recall, 1.0);
    }

    #[test]
    fn roc_csv_has_header_and_endpoints() {
        let curve = roc_curve(&labels(&[1, 0]), &[0.9, 0.1]).unwrap();
        let csv = roc_to_csv(&curve);
        assert!(csv.starts_with("fpr,tpr\n0,0\n"));
        assert!(csv.ends_with("1,1\n"));
    }
}
