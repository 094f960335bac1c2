//! Base classifiers written from scratch: Gaussian Naive Bayes, a CART
//! decision tree with gini impurity, and a random forest of those trees.

mod forest;
mod nb;
mod tree;

use serde::{Deserialize, Serialize};

use crate::ensembles::{BaggingModel, StackingModel};
use crate::error::{Error, Result};

pub use forest::{bootstrap, RandomForest};
pub use nb::GaussianNb;
pub use tree::{DecisionTree, Node};

/// Anything that maps a feature row to class probabilities.
pub trait Classifier: Send + Sync {
    fn n_classes(&self) -> usize;

    fn predict_proba(&self, row: &[f64]) -> Vec<f64>;

    /// Most probable class, lowest code on ties.
    fn predict(&self, row: &[f64]) -> usize {
        argmax(&self.predict_proba(row))
    }
}

/// Index of the largest value; the first one wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Gini impurity `1 - sum(p_i^2)` of a class histogram.
pub fn gini(class_counts: &[usize]) -> Result<f64> {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::Empty("gini of an empty node".into()));
    }
    Ok(gini_unchecked(class_counts, total))
}

pub(crate) fn gini_unchecked(class_counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    1.0 - class_counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    #[default]
    Gini,
}

/// Tree and forest hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub n_estimators: usize,
    pub max_depth: Option<usize>,
    /// Features examined per split; `None` means all of them.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub criterion: Criterion,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams::tree()
    }
}

impl Hyperparams {
    /// Random forest settings found by grid search on UNSW-NB15.
    pub fn forest() -> Self {
        Hyperparams {
            n_estimators: 100,
            max_depth: Some(80),
            max_features: Some(2),
            min_samples_split: 8,
            min_samples_leaf: 3,
            criterion: Criterion::Gini,
        }
    }

    /// Single decision tree settings: gini, min_samples_split 2, otherwise
    /// unconstrained.
    pub fn tree() -> Self {
        Hyperparams {
            n_estimators: 1,
            max_depth: None,
            max_features: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            criterion: Criterion::Gini,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_estimators == 0 {
            return Err(Error::Config("n_estimators must be >= 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::Config("min_samples_split must be >= 2".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::Config("min_samples_leaf must be >= 1".into()));
        }
        if self.max_features == Some(0) {
            return Err(Error::Config("max_features must be >= 1".into()));
        }
        Ok(())
    }

    /// Features examined per split for a table of the given width.
    pub(crate) fn features_per_split(&self, n_features: usize) -> usize {
        self.max_features.unwrap_or(n_features).clamp(1, n_features.max(1))
    }

    /// Overrides one named parameter from a JSON value, as used by grid
    /// search.
    pub fn set(&mut self, name: &str, value: &serde_json::Value) -> Result<()> {
        let mut next = self.clone();
        next.apply(name, value)?;
        next.validate()?;
        *self = next;
        Ok(())
    }

    fn apply(&mut self, name: &str, value: &serde_json::Value) -> Result<()> {
        let bad = || Error::Config(format!("invalid value {value} for `{name}`"));
        let as_usize = |v: &serde_json::Value| v.as_u64().map(|x| x as usize).ok_or_else(bad);
        match name {
            "n_estimators" => self.n_estimators = as_usize(value)?,
            "max_depth" => {
                self.max_depth = if value.is_null() {
                    None
                } else {
                    Some(as_usize(value)?)
                }
            }
            "max_features" => {
                self.max_features = if value.is_null() {
                    None
                } else {
                    Some(as_usize(value)?)
                }
            }
            "min_samples_split" => self.min_samples_split = as_usize(value)?,
            "min_samples_leaf" => self.min_samples_leaf = as_usize(value)?,
            "criterion" => {
                self.criterion = serde_json::from_value(value.clone()).map_err(|_| bad())?
            }
            other => return Err(Error::Config(format!("unknown hyperparameter `{other}`"))),
        }
        Ok(())
    }
}

/// Any fitted model of this crate.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_kind", rename_all = "snake_case")]
pub enum TrainedModel {
    GaussianNb(GaussianNb),
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
    Stacking(StackingModel),
    Bagging(BaggingModel),
}

impl Classifier for TrainedModel {
    fn n_classes(&self) -> usize {
        match self {
            TrainedModel::GaussianNb(m) => m.n_classes(),
            TrainedModel::DecisionTree(m) => m.n_classes(),
            TrainedModel::RandomForest(m) => m.n_classes(),
            TrainedModel::Stacking(m) => m.n_classes(),
            TrainedModel::Bagging(m) => m.n_classes(),
        }
    }

    fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        match self {
            TrainedModel::GaussianNb(m) => m.predict_proba(row),
            TrainedModel::DecisionTree(m) => m.predict_proba(row),
            TrainedModel::RandomForest(m) => m.predict_proba(row),
            TrainedModel::Stacking(m) => m.predict_proba(row),
            TrainedModel::Bagging(m) => m.predict_proba(row),
        }
    }
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Versioned JSON envelope for a [`TrainedModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub version: u32,
    #[serde(flatten)]
    pub model: TrainedModel,
}

impl ModelDocument {
    pub fn new(model: TrainedModel) -> Self {
        ModelDocument {
            version: MODEL_FORMAT_VERSION,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.version != MODEL_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported model format version {}",
                doc.version
            )));
        }
        Ok(doc)
    }
}
