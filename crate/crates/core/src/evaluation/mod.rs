//! Confusion matrices, per-class one-vs-rest metrics, repeated stratified
//! cross-validation and exhaustive grid search.

mod cv;
mod grid;
mod metrics;
mod report;

pub use cv::{cross_validate, cv_accuracy};
pub use grid::{grid_search, GridResult, ParamGrid, ParamPoint};
pub use metrics::{
    accuracy, confusion, confusion_k, degenerate_metrics, dr, f1, far, fpr, one_vs_rest,
    precision, recall, BinaryCounts, ConfusionMatrix,
};
pub use report::{
    aggregate, AveragingScheme, ClassMetrics, ClassReport, Overall, RepeatResult, Report, POOLING,
};
