//! Experiment orchestration behind the `ids` command-line tool.
//!
//! Commands share one output directory: `prep` writes the prepared table,
//! `select` the GA result and reduced table, `eval` the cross-validated
//! report, `gridsearch` the tuned parameters and `experiment` runs every
//! stage for all five classifiers plus a comparison table.

mod config;
mod manifest;
mod pipeline;

pub use config::{
    ClassifierKind, ConfigFile, CvConfig, ExperimentConfig, GridConfig, GridLearner,
    LearnerParams, ScaleScope, SubsampleConfig, SuiteConfig,
};
pub use manifest::{sha256_file, OutputLock, RunManifest, LOCK_FILE, TOOL_VERSION};
pub use pipeline::{
    cmd_eval, cmd_experiment, cmd_gridsearch, cmd_prep, cmd_select, comparison_csv,
    derived_seeds, evaluate, fit_classifier, fit_pipeline, ordering_warnings, prepare,
    run_grid, run_in_memory, select, suite_members, ComparisonRow, EvalOutput,
    ExperimentSummary, GridOutput, PipelineModel, Prepared, BEST_PARAMS_JSON, COMPARISON_CSV,
    GA_RESULT_JSON, LABEL_MAPPING_JSON, MODEL_JSON, ORDERING_SLACK, PREPARED_CSV, REPORT_JSON,
    REPORT_MD, SCALER_JSON, SELECTED_CSV,
};
