//! Stacking and bagging ensembles.
//!
//! Stacking feeds the out-of-fold class probabilities of a random forest, a
//! decision tree and Gaussian Naive Bayes (in that order) to a random forest
//! meta learner. Bagging trains one random forest per bootstrap resample and
//! averages their probabilities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataio::{stratified_kfold, ColumnKind, ColumnMeta, DataTable, Fold};
use crate::error::{Error, Result};
use crate::exec;
use crate::learners::{bootstrap, Classifier, DecisionTree, GaussianNb, Hyperparams, RandomForest};
use crate::seeds;

/// Level-0 learner order; meta-feature column `b * K + c` holds base `b`'s
/// probability for class `c`.
pub const BASE_ORDER: [&str; 3] = ["random_forest", "decision_tree", "gaussian_nb"];

pub const DEFAULT_OOF_FOLDS: usize = 5;
pub const DEFAULT_N_BAGS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackingModel {
    base_order: Vec<String>,
    oof_folds: usize,
    n_classes: usize,
    random_forest: RandomForest,
    decision_tree: DecisionTree,
    gaussian_nb: GaussianNb,
    meta: RandomForest,
}

/// Out-of-fold level-0 outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct OofMeta {
    /// Row-major `n_rows x 3K` matrix.
    pub features: Vec<f64>,
    pub width: usize,
    pub folds: Vec<Fold>,
}

struct BaseModels {
    rf: RandomForest,
    dt: DecisionTree,
    nb: GaussianNb,
}

impl BaseModels {
    fn fit(table: &DataTable, hp_rf: &Hyperparams, hp_dt: &Hyperparams, rf_seed: u64, dt_seed: u64) -> Result<Self> {
        Ok(BaseModels {
            rf: RandomForest::fit(table, hp_rf, rf_seed),
            dt: DecisionTree::fit(table, hp_dt, dt_seed),
            nb: GaussianNb::fit(table)?,
        })
    }

    fn meta_row(&self, row: &[f64]) -> Vec<f64> {
        let mut out = self.rf.predict_proba(row);
        out.extend(self.dt.predict_proba(row));
        out.extend(self.nb.predict_proba(row));
        out
    }
}

fn meta_table(source: &DataTable, features: Vec<f64>, width: usize) -> Result<DataTable> {
    let k = source.n_classes();
    let metas: Vec<ColumnMeta> = (0..width)
        .map(|j| ColumnMeta {
            name: format!("{}_p{}", BASE_ORDER[j / k], j % k),
            kind: ColumnKind::Numeric,
            index: j,
        })
        .collect();
    let label = ColumnMeta {
        index: width,
        ..source.label_column().clone()
    };
    DataTable::new(
        metas,
        label,
        features,
        source.labels().to_vec(),
        source.label_names().to_vec(),
    )
}

/// Level-0 probabilities for every row, each produced by base models that
/// did not see that row during training.
pub fn oof_meta_features(
    table: &DataTable,
    hp_rf: &Hyperparams,
    hp_dt: &Hyperparams,
    oof_folds: usize,
    seed: u64,
) -> Result<OofMeta> {
    let width = BASE_ORDER.len() * table.n_classes();
    let folds = stratified_kfold(table.labels(), oof_folds, seeds::derive_tag(seed, "oof"))?;
    let per_fold = exec::par_range(folds.len(), |f| -> Result<Vec<(usize, Vec<f64>)>> {
        let fold = &folds[f];
        let train = table.select_rows(&fold.train);
        let bases = BaseModels::fit(
            &train,
            hp_rf,
            hp_dt,
            seeds::derive2(seed, 1, f as u64),
            seeds::derive2(seed, 2, f as u64),
        )?;
        Ok(fold
            .test
            .iter()
            .map(|&i| (i, bases.meta_row(table.row(i))))
            .collect())
    });
    let mut features = vec![0.0; table.n_rows() * width];
    for rows in per_fold {
        for (i, meta) in rows? {
            features[i * width..(i + 1) * width].copy_from_slice(&meta);
        }
    }
    Ok(OofMeta {
        features,
        width,
        folds,
    })
}

impl StackingModel {
    /// Fits the meta forest on out-of-fold base probabilities, then refits
    /// the base models on the whole table.
    pub fn fit(
        table: &DataTable,
        hp_rf: &Hyperparams,
        hp_dt: &Hyperparams,
        oof_folds: usize,
        seed: u64,
    ) -> Result<Self> {
        if oof_folds < 2 {
            return Err(Error::Config("stacking needs oof_folds >= 2".into()));
        }
        let oof = oof_meta_features(table, hp_rf, hp_dt, oof_folds, seed)?;
        let meta_data = meta_table(table, oof.features, oof.width)?;
        let meta = RandomForest::fit(&meta_data, hp_rf, seeds::derive_tag(seed, "meta"));
        let bases = BaseModels::fit(
            table,
            hp_rf,
            hp_dt,
            seeds::derive_tag(seed, "rf"),
            seeds::derive_tag(seed, "dt"),
        )?;
        Ok(StackingModel {
            base_order: BASE_ORDER.iter().map(|s| (*s).to_owned()).collect(),
            oof_folds,
            n_classes: table.n_classes(),
            random_forest: bases.rf,
            decision_tree: bases.dt,
            gaussian_nb: bases.nb,
            meta,
        })
    }

    /// Concatenated base-model probabilities for `row`.
    pub fn meta_features(&self, row: &[f64]) -> Vec<f64> {
        let mut out = self.random_forest.predict_proba(row);
        out.extend(self.decision_tree.predict_proba(row));
        out.extend(self.gaussian_nb.predict_proba(row));
        out
    }

    pub fn base_order(&self) -> &[String] {
        &self.base_order
    }

    pub fn oof_folds(&self) -> usize {
        self.oof_folds
    }

    pub fn meta_model(&self) -> &RandomForest {
        &self.meta
    }

    pub fn meta_width(&self) -> usize {
        BASE_ORDER.len() * self.n_classes
    }
}

impl Classifier for StackingModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        self.meta.predict_proba(&self.meta_features(row))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggingModel {
    n_bags: usize,
    bag_seeds: Vec<u64>,
    n_classes: usize,
    bags: Vec<RandomForest>,
}

impl BaggingModel {
    /// One random forest per bootstrap resample of the table.
    pub fn fit(table: &DataTable, hp_rf: &Hyperparams, n_bags: usize, seed: u64) -> Result<Self> {
        if n_bags == 0 {
            return Err(Error::Config("bagging needs n_bags >= 1".into()));
        }
        let bag_seeds: Vec<u64> = (0..n_bags).map(|b| seeds::derive(seed, b as u64)).collect();
        let bags = exec::par_map(&bag_seeds, |&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let sample = bootstrap(table.n_rows(), &mut rng);
            RandomForest::fit_rows(table, &sample, hp_rf, rng.gen())
        });
        Ok(BaggingModel {
            n_bags,
            bag_seeds,
            n_classes: table.n_classes(),
            bags,
        })
    }

    pub fn bags(&self) -> &[RandomForest] {
        &self.bags
    }

    pub fn bag_seeds(&self) -> &[u64] {
        &self.bag_seeds
    }

    pub fn n_bags(&self) -> usize {
        self.n_bags
    }
}

impl Classifier for BaggingModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_classes];
        for bag in &self.bags {
            for (a, p) in acc.iter_mut().zip(bag.predict_proba(row)) {
                *a += p;
            }
        }
        let n = self.bags.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(n_per: usize, k: usize) -> DataTable {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for c in 0..k {
            for i in 0..n_per {
                let jitter = ((i * 31 + c * 7) % 17) as f64 / 170.0;
                rows.push(vec![c as f64 + jitter, (c * 2) as f64 - jitter, jitter]);
                labels.push(c);
            }
        }
        let names = (0..k).map(|c| format!("k{c}")).collect();
        DataTable::from_rows(&["a", "b", "c"], &rows, labels, names).unwrap()
    }

    fn small_rf() -> Hyperparams {
        Hyperparams {
            n_estimators: 10,
            ..Hyperparams::forest()
        }
    }

    #[test]
    fn meta_width_is_three_k() {
        let t = blobs(20, 4);
        let m = StackingModel::fit(&t, &small_rf(), &Hyperparams::tree(), 5, 1).unwrap();
        assert_eq!(m.meta_width(), 12);
        assert_eq!(m.meta_features(t.row(0)).len(), 12);
        assert_eq!(m.base_order(), BASE_ORDER);
    }

    #[test]
    fn perfect_bases_give_perfect_stack() {
        let t = blobs(20, 3);
        let m = StackingModel::fit(&t, &small_rf(), &Hyperparams::tree(), 5, 4).unwrap();
        for (r, &l) in t.rows().zip(t.labels()) {
            assert_eq!(m.predict(r), l);
        }
        let row = t.row(7);
        assert_eq!(m.predict_proba(row), m.predict_proba(row));
    }

    #[test]
    fn oof_rows_sum_to_three() {
        let t = blobs(15, 3);
        let oof = oof_meta_features(&t, &small_rf(), &Hyperparams::tree(), 3, 9).unwrap();
        for r in 0..t.n_rows() {
            let s: f64 = oof.features[r * oof.width..(r + 1) * oof.width].iter().sum();
            assert!((s - 3.0).abs() < 1e-6);
        }
    }

    #[test]
    fn stacking_rejects_bad_folds() {
        let t = blobs(3, 2);
        assert!(StackingModel::fit(&t, &small_rf(), &Hyperparams::tree(), 1, 0).is_err());
        assert!(matches!(
            StackingModel::fit(&t, &small_rf(), &Hyperparams::tree(), 5, 0),
            Err(Error::TooFewForFolds { .. })
        ));
    }

    #[test]
    fn single_bag_equals_its_forest() {
        let t = blobs(20, 3);
        let m = BaggingModel::fit(&t, &small_rf(), 1, 3).unwrap();
        assert_eq!(m.n_bags(), 1);
        for r in t.rows() {
            assert_eq!(m.predict_proba(r), m.bags()[0].predict_proba(r));
            assert_eq!(m.predict(r), m.bags()[0].predict(r));
        }
        assert!(BaggingModel::fit(&t, &small_rf(), 0, 3).is_err());
    }

    #[test]
    fn bagging_is_deterministic() {
        let t = blobs(20, 3);
        let a = BaggingModel::fit(&t, &small_rf(), 3, 8).unwrap();
        let b = BaggingModel::fit(&t, &small_rf(), 3, 8).unwrap();
        assert_eq!(a, b);
        for (r, &l) in t.rows().zip(t.labels()) {
            assert_eq!(a.predict(r), l);
        }
    }
}
