use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ClassifierKind, ExperimentConfig, GridLearner, ScaleScope, SuiteConfig};
use super::manifest::{write_json, OutputLock, RunManifest};
use crate::dataio::{
    apply_minmax, fit_minmax, load_csv, load_prepared, scale_value, stratified_subsample,
    DataTable, LabelMapping, ScalerParams,
};
use crate::ensembles::{BaggingModel, StackingModel};
use crate::error::{Error, Result};
use crate::evaluation::{cross_validate, grid_search, GridResult, ParamPoint, Report};
use crate::gaselect::{apply_mask, run_ga, GaConfig, GaRunResult};
use crate::learners::{
    Classifier, DecisionTree, GaussianNb, Hyperparams, ModelDocument, RandomForest, TrainedModel,
};
use crate::seeds;

pub const PREPARED_CSV: &str = "prepared.csv";
pub const SELECTED_CSV: &str = "selected.csv";
pub const LABEL_MAPPING_JSON: &str = "label_mapping.json";
pub const SCALER_JSON: &str = "scaler.json";
pub const GA_RESULT_JSON: &str = "ga_result.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_MD: &str = "report.md";
pub const MODEL_JSON: &str = "model.json";
pub const BEST_PARAMS_JSON: &str = "best_params.json";
pub const COMPARISON_CSV: &str = "comparison.csv";

/// Tolerance of the soft ensemble-versus-single ordering check.
pub const ORDERING_SLACK: f64 = 0.005;

/// Seeds every stage derives from the config.
pub fn derived_seeds(config: &ExperimentConfig) -> BTreeMap<String, u64> {
    let mut s = BTreeMap::new();
    s.insert("master".to_owned(), config.seed);
    if let Some(sub) = &config.subsample {
        s.insert("subsample".to_owned(), sub.seed);
    }
    s.insert("ga".to_owned(), config.ga.seed);
    s.insert("cv".to_owned(), cv_seed(config));
    s.insert("final_model".to_owned(), final_seed(config));
    s.insert("grid".to_owned(), seeds::derive_tag(config.seed, "grid"));
    s
}

fn cv_seed(config: &ExperimentConfig) -> u64 {
    seeds::derive_tag(config.seed, "cv")
}

fn final_seed(config: &ExperimentConfig) -> u64 {
    seeds::derive_tag(config.seed, "final")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub table: DataTable,
    pub mapping: LabelMapping,
    /// Present when scaling is global.
    pub scaler: Option<ScalerParams>,
}

/// Load, clean, encode, subsample and (for global scope) scale.
pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    let raw = load_csv(&config.dataset_path, &config.label_column, &config.drop_columns)?;
    let (table, mapping) = raw.clean(config.cleaning)?.encode();
    let table = match &config.subsample {
        Some(s) => stratified_subsample(&table, &s.counts, s.seed)?,
        None => table,
    };
    let (table, scaler) = match config.scale_scope {
        ScaleScope::Global => {
            let params = fit_minmax(&table);
            (apply_minmax(&table, &params)?, Some(params))
        }
        ScaleScope::PerFold => (table, None),
    };
    Ok(Prepared {
        table,
        mapping,
        scaler,
    })
}

/// Runs the GA and returns its result together with the reduced table.
pub fn select(ga: &GaConfig, table: &DataTable) -> Result<(GaRunResult, DataTable)> {
    let result = run_ga(table, ga)?;
    let reduced = apply_mask(table, &result.best_chromosome)?;
    Ok((result, reduced))
}

pub fn fit_classifier(
    kind: ClassifierKind,
    config: &ExperimentConfig,
    table: &DataTable,
    seed: u64,
) -> Result<TrainedModel> {
    let hp = &config.hyperparams;
    Ok(match kind {
        ClassifierKind::Nb => TrainedModel::GaussianNb(GaussianNb::fit(table)?),
        ClassifierKind::Dt => TrainedModel::DecisionTree(DecisionTree::fit(table, &hp.dt, seed)),
        ClassifierKind::Rf => TrainedModel::RandomForest(RandomForest::fit(table, &hp.rf, seed)),
        ClassifierKind::Stacking => TrainedModel::Stacking(StackingModel::fit(
            table,
            &hp.rf,
            &hp.dt,
            config.oof_folds,
            seed,
        )?),
        ClassifierKind::Bagging => {
            TrainedModel::Bagging(BaggingModel::fit(table, &hp.rf, config.n_bags, seed)?)
        }
    })
}

/// Optional scaling and feature mask in front of a trained model. Rows are
/// scaled first, then masked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineModel {
    pub scaler: Option<ScalerParams>,
    pub selected: Option<Vec<usize>>,
    pub model: ModelDocument,
}

impl PipelineModel {
    fn transform(&self, row: &[f64]) -> Vec<f64> {
        let scaled: Vec<f64> = match &self.scaler {
            Some(p) => row
                .iter()
                .zip(&p.columns)
                .map(|(&x, r)| scale_value(x, r))
                .collect(),
            None => row.to_vec(),
        };
        match &self.selected {
            Some(idx) => idx.iter().map(|&i| scaled[i]).collect(),
            None => scaled,
        }
    }
}

impl Classifier for PipelineModel {
    fn n_classes(&self) -> usize {
        self.model.model.n_classes()
    }

    fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        self.model.model.predict_proba(&self.transform(row))
    }
}

/// Fits the full per-fold pipeline on `train`: scaling for per-fold scope,
/// nested selection when enabled, then the classifier.
pub fn fit_pipeline(
    kind: ClassifierKind,
    config: &ExperimentConfig,
    train: &DataTable,
    seed: u64,
) -> Result<PipelineModel> {
    let (scaled, scaler) = match config.scale_scope {
        ScaleScope::PerFold => {
            let p = fit_minmax(train);
            (apply_minmax(train, &p)?, Some(p))
        }
        ScaleScope::Global => (train.clone(), None),
    };
    let (table, selected) = if config.nest_selection {
        let ga = GaConfig {
            seed: seeds::derive_tag(seed, "ga"),
            ..config.ga.clone()
        };
        let (result, reduced) = select(&ga, &scaled)?;
        (reduced, Some(result.best_chromosome.selected()))
    } else {
        (scaled, None)
    };
    let model = fit_classifier(kind, config, &table, seed)?;
    Ok(PipelineModel {
        scaler,
        selected,
        model: ModelDocument::new(model),
    })
}

/// Report plus the settings that shaped it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutput {
    pub dataset: String,
    pub classifier: ClassifierKind,
    pub scale_scope: ScaleScope,
    pub nest_selection: bool,
    pub k: usize,
    pub repeats: usize,
    #[serde(flatten)]
    pub report: Report,
}

/// Cross-validates `kind` on `table` (the reduced table, or the prepared
/// one when selection is nested).
pub fn evaluate(kind: ClassifierKind, config: &ExperimentConfig, table: &DataTable) -> Result<EvalOutput> {
    let report = cross_validate(
        |train, seed| fit_pipeline(kind, config, train, seed),
        table,
        config.cv.k,
        config.cv.repeats,
        cv_seed(config),
    )?;
    Ok(EvalOutput {
        dataset: config.display_name(),
        classifier: kind,
        scale_scope: config.scale_scope,
        nest_selection: config.nest_selection,
        k: config.cv.k,
        repeats: config.cv.repeats,
        report,
    })
}

/// prep, select and eval without touching the file system.
pub fn run_in_memory(config: &ExperimentConfig) -> Result<EvalOutput> {
    let prepared = prepare(config)?;
    let table = if config.nest_selection {
        prepared.table
    } else {
        select(&config.ga, &prepared.table)?.1
    };
    evaluate(config.classifier, config, &table)
}

fn out_dir(config: &ExperimentConfig) -> &Path {
    &config.output_dir
}

fn label_of(config: &ExperimentConfig) -> &str {
    &config.label_column
}

fn require(path: PathBuf, producer: &str) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::io(
            &path,
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("missing; run `{producer}` first"),
            ),
        ))
    }
}

/// Writes `prepared.csv`, `label_mapping.json`, `scaler.json` (global scope
/// only) and the manifest.
pub fn cmd_prep(config: &ExperimentConfig) -> Result<RunManifest> {
    config.check_paths()?;
    let dir = out_dir(config);
    let _lock = OutputLock::acquire(dir)?;
    prep_unlocked(config)
}

fn prep_unlocked(config: &ExperimentConfig) -> Result<RunManifest> {
    let dir = out_dir(config);
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut m = RunManifest::start("prep", config);
    m.seeds = derived_seeds(config);
    m.add_input(&config.dataset_path)?;
    let prepared = prepare(config)?;
    prepared.table.write_csv_file(&dir.join(PREPARED_CSV))?;
    write_json(&dir.join(LABEL_MAPPING_JSON), &prepared.mapping)?;
    m.outputs = vec![PREPARED_CSV.into(), LABEL_MAPPING_JSON.into()];
    let scaler_path = dir.join(SCALER_JSON);
    match &prepared.scaler {
        Some(p) => {
            write_json(&scaler_path, p)?;
            m.outputs.push(SCALER_JSON.into());
        }
        None if scaler_path.exists() => {
            fs::remove_file(&scaler_path).map_err(|e| Error::io(&scaler_path, e))?
        }
        None => {}
    }
    m.clone().finish(dir)?;
    Ok(m)
}

/// Reads `prepared.csv`, writes `ga_result.json`, `selected.csv` and the
/// manifest.
pub fn cmd_select(config: &ExperimentConfig) -> Result<RunManifest> {
    let dir = out_dir(config);
    let _lock = OutputLock::acquire(dir)?;
    select_unlocked(config)
}

fn select_unlocked(config: &ExperimentConfig) -> Result<RunManifest> {
    let dir = out_dir(config);
    let mut m = RunManifest::start("select", config);
    m.seeds = derived_seeds(config);
    let input = require(dir.join(PREPARED_CSV), "prep")?;
    m.add_input(&input)?;
    let table = load_prepared(&input, label_of(config))?;
    let (result, reduced) = select(&config.ga, &table)?;
    write_json(&dir.join(GA_RESULT_JSON), &result.to_document(&table))?;
    reduced.write_csv_file(&dir.join(SELECTED_CSV))?;
    m.outputs = vec![GA_RESULT_JSON.into(), SELECTED_CSV.into()];
    m.clone().finish(dir)?;
    Ok(m)
}

/// Reads the table to evaluate: the prepared one under nested selection,
/// otherwise the GA-reduced one.
fn eval_input(config: &ExperimentConfig) -> Result<PathBuf> {
    let dir = out_dir(config);
    if config.nest_selection {
        require(dir.join(PREPARED_CSV), "prep")
    } else {
        require(dir.join(SELECTED_CSV), "select")
    }
}

fn write_eval(dir: &Path, out: &EvalOutput, model: &PipelineModel) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_json(&dir.join(REPORT_JSON), out)?;
    let md = format!(
        "# {} / {}\n\n{}-fold cross-validation, {} repeats, scaling {:?}\n\n{}",
        out.dataset,
        out.classifier.name(),
        out.k,
        out.repeats,
        out.scale_scope,
        out.report.to_markdown()
    );
    fs::write(dir.join(REPORT_MD), md).map_err(|e| Error::io(dir.join(REPORT_MD), e))?;
    write_json(&dir.join(MODEL_JSON), model)
}

/// Cross-validates the configured classifier; writes `report.json`,
/// `report.md`, `model.json` (fitted on the whole table) and the manifest.
pub fn cmd_eval(config: &ExperimentConfig) -> Result<(RunManifest, EvalOutput)> {
    let dir = out_dir(config);
    let _lock = OutputLock::acquire(dir)?;
    let mut m = RunManifest::start("eval", config);
    m.seeds = derived_seeds(config);
    let input = eval_input(config)?;
    m.add_input(&input)?;
    let table = load_prepared(&input, label_of(config))?;
    let out = evaluate(config.classifier, config, &table)?;
    let model = fit_pipeline(config.classifier, config, &table, final_seed(config))?;
    write_eval(dir, &out, &model)?;
    m.outputs = vec![REPORT_JSON.into(), REPORT_MD.into(), MODEL_JSON.into()];
    m.clone().finish(dir)?;
    Ok((m, out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOutput {
    pub learner: GridLearner,
    pub k: usize,
    #[serde(flatten)]
    pub result: GridResult,
}

pub fn run_grid(config: &ExperimentConfig, table: &DataTable) -> Result<GridOutput> {
    let grid = config.grid.clone().unwrap_or_default();
    let base = match grid.learner {
        GridLearner::Rf => config.hyperparams.rf.clone(),
        GridLearner::Dt => config.hyperparams.dt.clone(),
    };
    let fit = |point: &ParamPoint, train: &DataTable, seed: u64| -> Result<TrainedModel> {
        let mut hp: Hyperparams = base.clone();
        for (name, value) in point {
            hp.set(name, value)?;
        }
        Ok(match grid.learner {
            GridLearner::Rf => TrainedModel::RandomForest(RandomForest::fit(train, &hp, seed)),
            GridLearner::Dt => TrainedModel::DecisionTree(DecisionTree::fit(train, &hp, seed)),
        })
    };
    let result = grid_search(
        &grid.params,
        fit,
        table,
        config.cv.k,
        seeds::derive_tag(config.seed, "grid"),
    )?;
    Ok(GridOutput {
        learner: grid.learner,
        k: config.cv.k,
        result,
    })
}

/// Grid search on the reduced table (the prepared one if selection has not
/// run); writes `best_params.json` and the manifest.
pub fn cmd_gridsearch(config: &ExperimentConfig) -> Result<(RunManifest, GridOutput)> {
    let dir = out_dir(config);
    let _lock = OutputLock::acquire(dir)?;
    let mut m = RunManifest::start("gridsearch", config);
    m.seeds = derived_seeds(config);
    let selected = dir.join(SELECTED_CSV);
    let input = if selected.is_file() {
        selected
    } else {
        require(dir.join(PREPARED_CSV), "prep")?
    };
    m.add_input(&input)?;
    let table = load_prepared(&input, label_of(config))?;
    let out = run_grid(config, &table)?;
    write_json(&dir.join(BEST_PARAMS_JSON), &out)?;
    m.outputs = vec![BEST_PARAMS_JSON.into()];
    m.clone().finish(dir)?;
    Ok((m, out))
}

/// Accuracy of every classifier on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub dataset: String,
    pub accuracy: BTreeMap<ClassifierKind, f64>,
    /// Weighted-average FAR of each classifier.
    pub far: BTreeMap<ClassifierKind, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub rows: Vec<ComparisonRow>,
    pub reports: Vec<EvalOutput>,
    pub warnings: Vec<String>,
}

/// Soft checks: stacking at least bagging, and each ensemble within
/// [`ORDERING_SLACK`] of the best single learner.
pub fn ordering_warnings(row: &ComparisonRow) -> Vec<String> {
    let acc = |k| row.accuracy.get(&k).copied();
    let mut out = Vec::new();
    if let (Some(s), Some(b)) = (acc(ClassifierKind::Stacking), acc(ClassifierKind::Bagging)) {
        if s < b {
            out.push(format!(
                "{}: stacking accuracy {s:.4} is below bagging {b:.4}",
                row.dataset
            ));
        }
    }
    let best_single = [ClassifierKind::Nb, ClassifierKind::Dt, ClassifierKind::Rf]
        .into_iter()
        .filter_map(acc)
        .fold(f64::NEG_INFINITY, f64::max);
    for kind in [ClassifierKind::Stacking, ClassifierKind::Bagging] {
        if let Some(a) = acc(kind) {
            if a < best_single - ORDERING_SLACK {
                out.push(format!(
                    "{}: {} accuracy {a:.4} is below the best single learner {best_single:.4}",
                    row.dataset,
                    kind.name()
                ));
            }
        }
    }
    out
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut s = String::from("dataset");
    for k in ClassifierKind::ALL {
        let _ = write!(s, ",{}", k.name());
    }
    s.push('\n');
    for row in rows {
        s.push_str(&row.dataset);
        for k in ClassifierKind::ALL {
            match row.accuracy.get(&k) {
                Some(a) => {
                    let _ = write!(s, ",{a}");
                }
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    s
}

/// prep, select and eval of all five classifiers for one dataset, written
/// under the config's output directory (one subdirectory per classifier).
fn experiment_one(config: &ExperimentConfig) -> Result<(ComparisonRow, Vec<EvalOutput>)> {
    config.check_paths()?;
    let dir = out_dir(config);
    prep_unlocked(config)?;
    if !config.nest_selection {
        select_unlocked(config)?;
    }
    let input = eval_input(config)?;
    let table = load_prepared(&input, label_of(config))?;
    let mut row = ComparisonRow {
        dataset: config.display_name(),
        accuracy: BTreeMap::new(),
        far: BTreeMap::new(),
    };
    let mut reports = Vec::new();
    for kind in ClassifierKind::ALL {
        let out = evaluate(kind, config, &table)?;
        let model = fit_pipeline(kind, config, &table, final_seed(config))?;
        write_eval(&dir.join(kind.name()), &out, &model)?;
        row.accuracy.insert(kind, out.report.overall.accuracy);
        row.far.insert(kind, out.report.overall.weighted.far);
        reports.push(out);
    }
    Ok((row, reports))
}

/// End-to-end run over one dataset or a suite. Each suite member writes to
/// `<suite output_dir>/<name>`; `comparison.csv` and the manifest go to the
/// top-level directory.
pub fn cmd_experiment(configs: &[ExperimentConfig], output_dir: &Path) -> Result<ExperimentSummary> {
    let _lock = OutputLock::acquire(output_dir)?;
    let mut summary = ExperimentSummary {
        rows: Vec::new(),
        reports: Vec::new(),
        warnings: Vec::new(),
    };
    let mut manifest: Option<RunManifest> = None;
    for config in configs {
        let (row, reports) = experiment_one(config)?;
        summary.warnings.extend(ordering_warnings(&row));
        let m = manifest.get_or_insert_with(|| RunManifest::start("experiment", config));
        for (k, v) in derived_seeds(config) {
            m.seeds.insert(format!("{}.{k}", row.dataset), v);
        }
        m.add_input(&config.dataset_path)?;
        summary.rows.push(row);
        summary.reports.extend(reports);
    }
    let csv_path = output_dir.join(COMPARISON_CSV);
    fs::write(&csv_path, comparison_csv(&summary.rows)).map_err(|e| Error::io(&csv_path, e))?;
    if let Some(mut m) = manifest {
        m.outputs = vec![COMPARISON_CSV.into()];
        m.warnings = summary.warnings.clone();
        m.finish(output_dir)?;
    }
    Ok(summary)
}

/// Expands a suite into per-member configs with their own output
/// subdirectories.
pub fn suite_members(suite: &SuiteConfig) -> Vec<ExperimentConfig> {
    suite
        .experiments
        .iter()
        .map(|c| ExperimentConfig {
            output_dir: suite.output_dir.join(c.display_name()),
            ..c.clone()
        })
        .collect()
}
