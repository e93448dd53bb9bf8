use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// `counts[truth][pred]` over one-based labels `1..=classes`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        Self {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    /// Builds a matrix from row-major counts.
    pub fn from_counts(classes: usize, counts: Vec<u64>) -> Result<Self, EvalError> {
        if counts.len() != classes * classes {
            return Err(EvalError::Length {
                preds: counts.len(),
                truth: classes * classes,
            });
        }
        Ok(Self { classes, counts })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Count for one-based `truth`, `pred`.
    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[(truth - 1) * self.classes + pred - 1]
    }

    pub fn record(&mut self, truth: usize, pred: usize) -> Result<(), EvalError> {
        for label in [truth, pred] {
            if label == 0 || label > self.classes {
                return Err(EvalError::LabelOutOfRange {
                    label,
                    classes: self.classes,
                });
            }
        }
        self.counts[(truth - 1) * self.classes + pred - 1] += 1;
        Ok(())
    }

    /// Adds another matrix of the same size.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.classes, other.classes, "confusion matrix sizes differ");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_total(&self, truth: usize) -> u64 {
        let r = (truth - 1) * self.classes;
        self.counts[r..r + self.classes].iter().sum()
    }

    pub fn col_total(&self, pred: usize) -> u64 {
        (0..self.classes).map(|r| self.counts[r * self.classes + pred - 1]).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|i| self.counts[i * self.classes + i]).sum()
    }
}

pub fn confusion<P, T>(preds: &[P], truth: &[T], classes: usize) -> Result<ConfusionMatrix, EvalError>
where
    P: Copy + Into<usize>,
    T: Copy + Into<usize>,
{
    if preds.len() != truth.len() {
        return Err(EvalError::Length {
            preds: preds.len(),
            truth: truth.len(),
        });
    }
    let mut cm = ConfusionMatrix::new(classes);
    for (&p, &t) in preds.iter().zip(truth) {
        cm.record(t.into(), p.into())?;
    }
    Ok(cm)
}

/// One-vs-rest counts and rates of a single class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64, what: &str, class: usize) -> f64 {
    if den == 0 {
        log::warn!("{what} undefined for class {class}; counted as 0");
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn class_metrics(cm: &ConfusionMatrix, class: usize) -> ClassMetrics {
    let tp = cm.get(class, class);
    let fp = cm.col_total(class) - tp;
    let fn_ = cm.row_total(class) - tp;
    let tn = cm.total() - tp - fp - fn_;
    let precision = ratio(tp, tp + fp, "precision", class);
    let recall = ratio(tp, tp + fn_, "recall", class);
    let specificity = ratio(tn, tn + fp, "specificity", class);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        log::warn!("F1 undefined for class {class}; counted as 0");
        0.0
    };
    ClassMetrics {
        tp,
        fp,
        fn_,
        tn,
        precision,
        recall,
        specificity,
        f1,
    }
}

/// Macro averages over the classes that occur in the truth.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    /// Plain fraction of correct predictions.
    pub accuracy: f64,
    /// Mean per-class recall.
    pub balanced_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub f1: f64,
}

impl MetricSet {
    pub const FIELDS: usize = 6;

    pub fn to_array(&self) -> [f64; Self::FIELDS] {
        [
            self.accuracy,
            self.balanced_accuracy,
            self.precision,
            self.recall,
            self.specificity,
            self.f1,
        ]
    }

    pub fn from_array(a: [f64; Self::FIELDS]) -> Self {
        Self {
            accuracy: a[0],
            balanced_accuracy: a[1],
            precision: a[2],
            recall: a[3],
            specificity: a[4],
            f1: a[5],
        }
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricSet, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let present: Vec<usize> = (1..=cm.classes()).filter(|&c| cm.row_total(c) > 0).collect();
    let k = present.len() as f64;
    let mut sum = [0.0; 4];
    for &c in &present {
        let m = class_metrics(cm, c);
        sum[0] += m.precision;
        sum[1] += m.recall;
        sum[2] += m.specificity;
        sum[3] += m.f1;
    }
    let recall = sum[1] / k;
    Ok(MetricSet {
        accuracy: cm.trace() as f64 / total as f64,
        balanced_accuracy: recall,
        precision: sum[0] / k,
        recall,
        specificity: sum[2] / k,
        f1: sum[3] / k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_perfect() {
        let labels: Vec<usize> = (1..=12).cycle().take(60).collect();
        let cm = confusion(&labels, &labels, 12).unwrap();
        assert_eq!(cm.trace(), 60);
        let m = metrics(&cm).unwrap();
        for v in m.to_array() {
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn all_normal_predictions_fill_one_column() {
        let truth = [1usize, 1, 2, 2];
        let preds = [2usize; 4];
        let cm = confusion(&preds, &truth, 2).unwrap();
        assert_eq!(cm.counts(), &[0, 2, 0, 2]);
        assert_eq!(cm.total(), 4);
    }

    #[test]
    fn binary_example() {
        let cm = ConfusionMatrix::from_counts(2, vec![2, 1, 1, 6]).unwrap();
        let m = class_metrics(&cm, 1);
        assert_eq!((m.tp, m.fp, m.fn_, m.tn), (2, 1, 1, 6));
        assert!((m.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.specificity - 6.0 / 7.0).abs() < 1e-15);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert_eq!(
            confusion(&[1usize], &[1usize, 2], 2),
            Err(EvalError::Length { preds: 1, truth: 2 })
        );
        assert_eq!(
            confusion(&[3usize], &[1usize], 2),
            Err(EvalError::LabelOutOfRange { label: 3, classes: 2 })
        );
        assert_eq!(metrics(&ConfusionMatrix::new(3)), Err(EvalError::EmptyMatrix));
    }

    #[test]
    fn absent_classes_are_not_averaged() {
        // class 3 never occurs in the truth
        let cm = ConfusionMatrix::from_counts(3, vec![5, 0, 0, 0, 5, 0, 0, 0, 0]).unwrap();
        let m = metrics(&cm).unwrap();
        assert_eq!(m.balanced_accuracy, 1.0);
        assert_eq!(m.specificity, 1.0);
    }
}
