use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dataio::CleaningPolicy;
use crate::ensembles::{DEFAULT_N_BAGS, DEFAULT_OOF_FOLDS};
use crate::error::{Error, Result};
use crate::evaluation::ParamGrid;
use crate::gaselect::GaConfig;
use crate::learners::Hyperparams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Nb,
    Dt,
    Rf,
    #[default]
    Stacking,
    Bagging,
}

impl ClassifierKind {
    /// Comparison order: single learners first, then the ensembles.
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::Nb,
        ClassifierKind::Dt,
        ClassifierKind::Rf,
        ClassifierKind::Stacking,
        ClassifierKind::Bagging,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Nb => "nb",
            ClassifierKind::Dt => "dt",
            ClassifierKind::Rf => "rf",
            ClassifierKind::Stacking => "stacking",
            ClassifierKind::Bagging => "bagging",
        }
    }

    pub fn is_ensemble(self) -> bool {
        matches!(self, ClassifierKind::Stacking | ClassifierKind::Bagging)
    }
}

/// Where min-max scaling is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScaleScope {
    /// Once on the prepared table, before selection and evaluation.
    #[default]
    Global,
    /// On each cross-validation training fold; the prepared table stays raw.
    PerFold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsampleConfig {
    /// Rows to draw per label name.
    pub counts: BTreeMap<String, usize>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerParams {
    pub rf: Hyperparams,
    pub dt: Hyperparams,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams {
            rf: Hyperparams::forest(),
            dt: Hyperparams::tree(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub k: usize,
    pub repeats: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { k: 10, repeats: 10 }
    }
}

/// Which learner a grid search tunes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GridLearner {
    #[default]
    Rf,
    Dt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub learner: GridLearner,
    pub params: ParamGrid,
}

impl Default for GridConfig {
    /// A small grid over the six tuned random forest parameters.
    fn default() -> Self {
        let grid: BTreeMap<String, Vec<Value>> = [
            ("n_estimators", vec![Value::from(50), Value::from(100)]),
            ("criterion", vec![Value::from("gini")]),
            ("max_depth", vec![Value::from(40), Value::from(80)]),
            ("max_features", vec![Value::from(2), Value::from(4)]),
            ("min_samples_split", vec![Value::from(2), Value::from(8)]),
            ("min_samples_leaf", vec![Value::from(1), Value::from(3)]),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v))
        .collect();
        GridConfig {
            learner: GridLearner::Rf,
            params: ParamGrid { params: grid },
        }
    }
}

/// One dataset run. Field names are the JSON keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Display name; defaults to the dataset file stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dataset_path: PathBuf,
    pub label_column: String,
    #[serde(default)]
    pub drop_columns: Vec<String>,
    #[serde(default)]
    pub cleaning: CleaningPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsample: Option<SubsampleConfig>,
    #[serde(default)]
    pub ga: GaConfig,
    #[serde(default)]
    pub classifier: ClassifierKind,
    #[serde(default)]
    pub hyperparams: LearnerParams,
    #[serde(default = "default_oof_folds")]
    pub oof_folds: usize,
    #[serde(default = "default_n_bags")]
    pub n_bags: usize,
    #[serde(default)]
    pub cv: CvConfig,
    #[serde(default)]
    pub scale_scope: ScaleScope,
    /// Run feature selection inside every CV training fold.
    #[serde(default)]
    pub nest_selection: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_oof_folds() -> usize {
    DEFAULT_OOF_FOLDS
}

fn default_n_bags() -> usize {
    DEFAULT_N_BAGS
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// Minimal config with every optional field at its default.
    pub fn new(dataset_path: impl Into<PathBuf>, label_column: &str) -> Self {
        ExperimentConfig {
            name: None,
            dataset_path: dataset_path.into(),
            label_column: label_column.to_owned(),
            drop_columns: Vec::new(),
            cleaning: CleaningPolicy::default(),
            subsample: None,
            ga: GaConfig::default(),
            classifier: ClassifierKind::default(),
            hyperparams: LearnerParams::default(),
            oof_folds: DEFAULT_OOF_FOLDS,
            n_bags: DEFAULT_N_BAGS,
            cv: CvConfig::default(),
            scale_scope: ScaleScope::default(),
            nest_selection: false,
            grid: None,
            output_dir: default_output_dir(),
            seed: 0,
        }
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.dataset_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".to_owned())
        })
    }

    /// Replaces the master, GA and subsample seeds with `seed`.
    pub fn override_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.ga.seed = seed;
        if let Some(s) = self.subsample.as_mut() {
            s.seed = seed;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.label_column.is_empty() {
            return fail("label_column is empty".into());
        }
        if self.cv.k < 2 {
            return fail("cv.k must be >= 2".into());
        }
        if self.cv.repeats == 0 {
            return fail("cv.repeats must be >= 1".into());
        }
        if self.oof_folds < 2 {
            return fail("oof_folds must be >= 2".into());
        }
        if self.n_bags == 0 {
            return fail("n_bags must be >= 1".into());
        }
        if let Some(s) = &self.subsample {
            if s.counts.is_empty() {
                return fail("subsample.counts is empty".into());
            }
        }
        self.ga.validate()?;
        self.hyperparams.rf.validate()?;
        self.hyperparams.dt.validate()?;
        if let Some(g) = &self.grid {
            g.params.validate()?;
        }
        Ok(())
    }

    /// Checks that the dataset file exists.
    pub fn check_paths(&self) -> Result<()> {
        if !self.dataset_path.is_file() {
            return Err(Error::Config(format!(
                "dataset_path {} does not exist",
                self.dataset_path.display()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub experiments: Vec<ExperimentConfig>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

/// What a `--config` file may contain.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigFile {
    Single(ExperimentConfig),
    Suite(SuiteConfig),
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        let parsed = if obj.contains_key("experiments") {
            serde_json::from_value(value).map(ConfigFile::Suite)
        } else if obj.contains_key("command") && obj.contains_key("config") {
            // a run manifest: replay its config snapshot
            serde_json::from_value(obj["config"].clone()).map(ConfigFile::Single)
        } else {
            serde_json::from_value(value).map(ConfigFile::Single)
        };
        let parsed = parsed.map_err(|e| Error::Config(e.to_string()))?;
        match &parsed {
            ConfigFile::Single(c) => c.validate()?,
            ConfigFile::Suite(s) => {
                if s.experiments.is_empty() {
                    return Err(Error::Config("suite has no experiments".into()));
                }
                s.experiments.iter().try_for_each(ExperimentConfig::validate)?;
            }
        }
        Ok(parsed)
    }

    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        ConfigFile::parse(&text)
    }

    /// The single experiment, or a config error for a suite.
    pub fn single(self) -> Result<ExperimentConfig> {
        match self {
            ConfigFile::Single(c) => Ok(c),
            ConfigFile::Suite(_) => Err(Error::Config(
                "suite configs are only accepted by `experiment`".into(),
            )),
        }
    }
}
