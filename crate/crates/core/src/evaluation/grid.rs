use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::cv::cv_accuracy;
use crate::dataio::DataTable;
use crate::error::{Error, Result};
use crate::exec;
use crate::learners::Classifier;

/// One assignment of every grid parameter.
pub type ParamPoint = BTreeMap<String, Value>;

/// Candidate values per named parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct ParamGrid {
    pub params: BTreeMap<String, Vec<Value>>,
}

impl ParamGrid {
    pub fn new(params: BTreeMap<String, Vec<Value>>) -> Result<Self> {
        let grid = ParamGrid { params };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.is_empty() {
            return Err(Error::Config("parameter grid is empty".into()));
        }
        if let Some((name, _)) = self.params.iter().find(|(_, v)| v.is_empty()) {
            return Err(Error::Config(format!("no candidate values for `{name}`")));
        }
        Ok(())
    }

    /// Cartesian product in enumeration order: keys sorted, the last key
    /// varying fastest, values in list order.
    pub fn points(&self) -> Vec<ParamPoint> {
        let keys: Vec<&String> = self.params.keys().collect();
        let mut out = vec![ParamPoint::new()];
        for key in keys {
            let values = &self.params[key];
            out = out
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.insert(key.clone(), v.clone());
                        q
                    })
                })
                .collect();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best_params: ParamPoint,
    pub best_score: f64,
    /// Every point with its score, in enumeration order.
    pub scores: Vec<(ParamPoint, f64)>,
}

/// Scores every grid point by k-fold cross-validated accuracy (one repeat,
/// same folds for every point). The earliest point wins ties.
pub fn grid_search<M, F>(
    grid: &ParamGrid,
    fit: F,
    table: &DataTable,
    k: usize,
    seed: u64,
) -> Result<GridResult>
where
    M: Classifier,
    F: Fn(&ParamPoint, &DataTable, u64) -> Result<M> + Sync,
{
    grid.validate()?;
    let points = grid.points();
    let scores = exec::par_map(&points, |p| {
        cv_accuracy(|train, s| fit(p, train, s), table, k, seed)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(GridResult {
        best_params: points[best].clone(),
        best_score: scores[best],
        scores: points.into_iter().zip(scores).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn grid(pairs: &[(&str, Vec<Value>)]) -> ParamGrid {
        ParamGrid::new(pairs.iter().map(|(k, v)| ((*k).to_owned(), v.clone())).collect()).unwrap()
    }

    #[test]
    fn enumeration_order() {
        let g = grid(&[("b", vec![json!(1), json!(2)]), ("a", vec![json!("x"), json!("y")])]);
        let pts: Vec<(Value, Value)> = g
            .points()
            .into_iter()
            .map(|p| (p["a"].clone(), p["b"].clone()))
            .collect();
        assert_eq!(
            pts,
            vec![
                (json!("x"), json!(1)),
                (json!("x"), json!(2)),
                (json!("y"), json!(1)),
                (json!("y"), json!(2)),
            ]
        );
    }

    #[test]
    fn empty_grids_rejected() {
        assert!(ParamGrid::new(BTreeMap::new()).is_err());
        assert!(ParamGrid::new([("a".to_owned(), vec![])].into()).is_err());
    }
}
