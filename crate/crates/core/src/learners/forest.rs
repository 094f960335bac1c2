use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Classifier, DecisionTree, Hyperparams};
use crate::dataio::DataTable;
use crate::exec;
use crate::seeds;

/// Bootstrap-aggregated CART trees with per-split feature subsampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    tree_seeds: Vec<u64>,
    max_features: usize,
    n_classes: usize,
}

/// `n` draws with replacement from `0..n`.
pub fn bootstrap(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

impl RandomForest {
    pub fn fit(table: &DataTable, hp: &Hyperparams, seed: u64) -> Self {
        let rows: Vec<usize> = (0..table.n_rows()).collect();
        Self::fit_rows(table, &rows, hp, seed)
    }

    /// Fits on a subset of rows. Tree `t` uses the stream
    /// `seeds::derive(seed, t)`: first for its bootstrap draw over `rows`,
    /// then for its split feature subsets.
    pub fn fit_rows(table: &DataTable, rows: &[usize], hp: &Hyperparams, seed: u64) -> Self {
        let tree_seeds: Vec<u64> = (0..hp.n_estimators)
            .map(|t| seeds::derive(seed, t as u64))
            .collect();
        let trees = exec::par_map(&tree_seeds, |&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let sample: Vec<usize> = bootstrap(rows.len(), &mut rng)
                .into_iter()
                .map(|i| rows[i])
                .collect();
            DecisionTree::fit_rows(table, &sample, hp, &mut rng)
        });
        RandomForest {
            trees,
            tree_seeds,
            max_features: hp.features_per_split(table.n_features()),
            n_classes: table.n_classes(),
        }
    }

    /// Assembles a forest from already-fitted trees.
    pub fn from_trees(trees: Vec<DecisionTree>, tree_seeds: Vec<u64>) -> Self {
        let n_classes = trees.first().map_or(0, |t| t.n_classes());
        let max_features = trees
            .first()
            .map_or(1, |t| t.hyperparams().features_per_split(t.n_features()));
        RandomForest {
            trees,
            tree_seeds,
            max_features,
            n_classes,
        }
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn tree_seeds(&self) -> &[u64] {
        &self.tree_seeds
    }

    pub fn max_features(&self) -> usize {
        self.max_features
    }
}

impl Classifier for RandomForest {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_classes];
        for tree in &self.trees {
            for (a, p) in acc.iter_mut().zip(tree.predict_proba(row)) {
                *a += p;
            }
        }
        let n = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}
