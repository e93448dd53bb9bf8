//! Metrics, sequential cross-validation and the ablation harness.

mod cv;
mod experiment;
mod metrics;
mod report;

use alloc::string::String;

pub use cv::{seq_cv_plan, SeqCvPlan, SeqFold, BLOCK_FRACTION, MIN_SERIES};
pub use experiment::{run_experiment, run_fold, ExperimentData, FoldOutcome, SharedStages, MIN_VALID_FOLDS};
pub use metrics::{class_metrics, confusion, metrics, ClassMetrics, ConfusionMatrix, MetricSet};
pub use report::{
    cell, mean_std, parse_cell, render_report, report_columns, sig3, EvalReport, FoldResult, ReportFormat,
    REPORT_COLUMNS,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("{preds} predictions for {truth} labels")]
    Length { preds: usize, truth: usize },
    #[error("label {label} outside 1..={classes}")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("series of {total} steps is too short (need {min})")]
    SeriesTooShort { total: usize, min: usize },
    #[error("only {valid} folds succeeded, {required} required")]
    TooFewFolds { valid: usize, required: usize },
    #[error("fold {fold}: {message}")]
    Fold { fold: usize, message: String },
    #[error("invalid configuration: {0}")]
    Config(&'static str),
}
