//! Evaluation: point metrics, PR curves, stratified cross-validation, the
//! cross-validated paired t-test, and temporal-window experiments.

mod folds;
mod metrics;
mod protocol;
mod ttest;

use thiserror::Error;

pub use folds::{stratified_kfold, FoldAssignment};
pub use metrics::{
    fscore, point_metrics, pr_curve, ConfusionCounts, MetricsResult, PrCurve, PrPoint,
};
pub use protocol::{
    cross_validate, temporal_experiment, CrossValidationReport, FoldAudit, LabelColumn,
    TemporalReport,
};
pub use ttest::{paired_ttest, student_t_two_tailed_p, TTestResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("PR curve needs at least one positive instance")]
    NoPositives,
    #[error("score at index {0} is not finite")]
    NonFiniteScore(usize),
    #[error("{class} class has {count} rows, fewer than k = {k}")]
    ClassSmallerThanK {
        class: &'static str,
        count: usize,
        k: usize,
    },
    #[error("k must be at least 2, got {0}")]
    BadFoldCount(usize),
    #[error("paired t-test needs at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("train-year set must not overlap the test year unless identical to it")]
    OverlappingYears,
    #[error("no instances for {0}")]
    EmptyPartition(String),
    #[error("resampling failed: {0}")]
    Balance(#[from] crate::balance::BalanceError),
    #[error("training failed: {0}")]
    Learn(#[from] crate::learn::LearnError),
    #[error("feature stage failed: {0}")]
    Feature(#[from] crate::features::FeatureError),
}
