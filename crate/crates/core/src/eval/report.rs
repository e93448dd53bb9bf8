use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{EvalError, MetricSet, SeqFold};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub index: usize,
    /// Sequential block pair, when the fold came from a [`SeqCvPlan`](super::SeqCvPlan).
    pub fold: Option<SeqFold>,
    pub metrics: MetricSet,
}

/// Per-fold metrics with their mean and population standard deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub variant: String,
    pub folds: Vec<FoldResult>,
    /// Folds that failed and were left out.
    pub skipped: Vec<usize>,
    pub mean: MetricSet,
    pub std: MetricSet,
}

impl EvalReport {
    pub fn from_folds(variant: &str, folds: Vec<FoldResult>, skipped: Vec<usize>) -> Result<Self, EvalError> {
        if folds.is_empty() {
            return Err(EvalError::TooFewFolds { valid: 0, required: 1 });
        }
        let (mean, std) = mean_std(folds.iter().map(|f| f.metrics));
        Ok(Self {
            variant: variant.into(),
            folds,
            skipped,
            mean,
            std,
        })
    }
}

/// Mean and population standard deviation of each metric.
pub fn mean_std(sets: impl Iterator<Item = MetricSet> + Clone) -> (MetricSet, MetricSet) {
    let n = sets.clone().count().max(1) as f64;
    let mut mean = [0.0; MetricSet::FIELDS];
    for s in sets.clone() {
        for (m, v) in mean.iter_mut().zip(s.to_array()) {
            *m += v / n;
        }
    }
    let mut var = [0.0; MetricSet::FIELDS];
    for s in sets {
        for ((acc, v), m) in var.iter_mut().zip(s.to_array()).zip(mean) {
            *acc += (v - m) * (v - m) / n;
        }
    }
    (MetricSet::from_array(mean), MetricSet::from_array(var.map(libm::sqrt)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Markdown,
}

pub const REPORT_COLUMNS: [&str; 5] = ["Accuracy", "Precision", "Recall", "Specificity", "F1"];

/// The five reported metrics in column order; "Accuracy" is balanced accuracy.
pub fn report_columns(m: &MetricSet) -> [f64; 5] {
    [m.balanced_accuracy, m.precision, m.recall, m.specificity, m.f1]
}

/// Formats `x` with three significant digits (fixed notation).
pub fn sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{:.2}", x);
    }
    let mut decimals = 2 - libm::floor(libm::log10(libm::fabs(x))) as i32;
    let s = format!("{:.*}", decimals.max(0) as usize, x);
    // rounding may carry into a new leading digit (e.g. 9.996 -> 10.00)
    let rounded: f64 = s.parse().unwrap_or(x);
    if decimals > 0 && libm::fabs(rounded) >= libm::pow(10.0, f64::from(3 - decimals)) {
        decimals -= 1;
        return format!("{:.*}", decimals as usize, x);
    }
    s
}

/// `mean±std` in percent.
pub fn cell(mean: f64, std: f64) -> String {
    format!("{}±{}", sig3(100.0 * mean), sig3(100.0 * std))
}

/// One row per report, columns as [`REPORT_COLUMNS`].
pub fn render_report(reports: &[EvalReport], format: ReportFormat) -> String {
    let mut out = String::new();
    let rows = reports.iter().map(|r| {
        let cells: Vec<String> = report_columns(&r.mean)
            .iter()
            .zip(report_columns(&r.std))
            .map(|(m, s)| cell(*m, s))
            .collect();
        (r.variant.as_str(), cells)
    });
    match format {
        ReportFormat::Markdown => {
            out.push_str("| Variant |");
            for c in REPORT_COLUMNS {
                out.push_str(&format!(" {c} |"));
            }
            out.push_str("\n|---|");
            for _ in REPORT_COLUMNS {
                out.push_str("---|");
            }
            out.push('\n');
            for (name, cells) in rows {
                out.push_str(&format!("| {name} |"));
                for c in cells {
                    out.push_str(&format!(" {c} |"));
                }
                out.push('\n');
            }
        }
        ReportFormat::Csv => {
            out.push_str("variant");
            for c in REPORT_COLUMNS {
                out.push(',');
                out.push_str(c);
            }
            out.push('\n');
            for (name, cells) in rows {
                out.push_str(name);
                for c in cells {
                    out.push(',');
                    out.push_str(&c);
                }
                out.push('\n');
            }
        }
    }
    out
}

/// Splits a `mean±std` cell back into percentages.
pub fn parse_cell(cell: &str) -> Option<(f64, f64)> {
    let (m, s) = cell.trim().split_once('±')?;
    Some((m.parse().ok()?, s.parse().ok()?))
}
