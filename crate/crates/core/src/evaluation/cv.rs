use super::metrics::{confusion, ConfusionMatrix};
use super::report::{aggregate, AveragingScheme, RepeatResult, Report};
use crate::dataio::{stratified_kfold, DataTable};
use crate::error::Result;
use crate::exec;
use crate::learners::Classifier;
use crate::seeds;

/// Repeated stratified k-fold cross-validation.
///
/// Repeat `r` splits with seed `seed + r`; fold `f` of that repeat fits with
/// seed `derive2(seed + r, 0, f)`. Predictions are pooled into one
/// confusion matrix per repeat, and the returned report averages the
/// per-repeat metrics.
pub fn cross_validate<M, F>(
    fit: F,
    table: &DataTable,
    k: usize,
    repeats: usize,
    seed: u64,
) -> Result<Report>
where
    M: Classifier,
    F: Fn(&DataTable, u64) -> Result<M> + Sync,
{
    let repeats = repeats.max(1);
    let splits = (0..repeats)
        .map(|r| stratified_kfold(table.labels(), k, seed.wrapping_add(r as u64)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..repeats)
        .flat_map(|r| (0..k).map(move |f| (r, f)))
        .collect();
    let outcomes = exec::par_map(&jobs, |&(r, f)| -> Result<ConfusionMatrix> {
        let fold = &splits[r][f];
        let train = table.select_rows(&fold.train);
        let model = fit(&train, seeds::derive2(seed.wrapping_add(r as u64), 0, f as u64))?;
        let truth: Vec<usize> = fold.test.iter().map(|&i| table.labels()[i]).collect();
        let pred: Vec<usize> = fold.test.iter().map(|&i| model.predict(table.row(i))).collect();
        confusion(&truth, &pred, table.label_names())
    });

    let mut pooled: Vec<ConfusionMatrix> =
        vec![ConfusionMatrix::zeros(table.label_names().to_vec()); repeats];
    for (&(r, _), cm) in jobs.iter().zip(outcomes) {
        pooled[r].add(&cm?)?;
    }
    let reports: Vec<Report> = pooled
        .iter()
        .enumerate()
        .map(|(r, cm)| {
            let mut rep = Report::from_confusion(cm);
            rep.per_repeat.push(RepeatResult {
                repeat: r,
                seed: seed.wrapping_add(r as u64),
                accuracy: rep.overall.accuracy,
                confusion: cm.clone(),
            });
            rep
        })
        .collect();
    aggregate(&reports, AveragingScheme::Macro)
}

/// Mean cross-validated accuracy with a single repeat.
pub fn cv_accuracy<M, F>(fit: F, table: &DataTable, k: usize, seed: u64) -> Result<f64>
where
    M: Classifier,
    F: Fn(&DataTable, u64) -> Result<M> + Sync,
{
    Ok(cross_validate(fit, table, k, 1, seed)?.overall.accuracy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::DataTable;
    use crate::learners::{DecisionTree, GaussianNb, Hyperparams};

    /// Predicts the class stored in feature 0.
    struct Oracle(usize);

    impl Classifier for Oracle {
        fn n_classes(&self) -> usize {
            self.0
        }
        fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
            let mut p = vec![0.0; self.0];
            p[row[0] as usize] = 1.0;
            p
        }
    }

    fn coded(n: usize, k: usize) -> DataTable {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![(i % k) as f64, (i * 7 % 5) as f64]).collect();
        let labels = (0..n).map(|i| i % k).collect();
        let names = (0..k).map(|c| format!("c{c}")).collect();
        DataTable::from_rows(&["code", "x"], &rows, labels, names).unwrap()
    }

    #[test]
    fn perfect_recipe() {
        let t = coded(40, 4);
        let rep = cross_validate(|tr, _| Ok(Oracle(tr.n_classes())), &t, 5, 3, 1).unwrap();
        assert_eq!(rep.overall.accuracy, 1.0);
        assert!(rep.per_class.iter().all(|c| c.metrics.far == 0.0));
        assert_eq!(rep.per_repeat.len(), 3);
        assert_eq!(rep.confusion.total(), 120);
    }

    #[test]
    fn deterministic_report() {
        let t = coded(60, 3);
        let fit = |tr: &DataTable, s: u64| Ok(DecisionTree::fit(tr, &Hyperparams { max_features: Some(1), ..Hyperparams::tree() }, s));
        let a = cross_validate(fit, &t, 4, 2, 9).unwrap();
        let b = cross_validate(fit, &t, 4, 2, 9).unwrap();
        assert_eq!(a, b);
    }

    /// Stratification forces k <= smallest class size, so with two classes of
    /// four rows each, k = 4 holds out one row per class.
    #[test]
    fn small_k_matches_hand_loop() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 * 0.1 + (i % 2) as f64]).collect();
        let labels: Vec<usize> = (0..8).map(|i| i % 2).collect();
        let t = DataTable::from_rows(&["x"], &rows, labels.clone(), vec!["a".into(), "b".into()]).unwrap();
        let rep = cross_validate(|tr, _| GaussianNb::fit(tr), &t, 4, 1, 0).unwrap();
        let folds = stratified_kfold(&labels, 4, 0).unwrap();
        let mut hits = 0;
        for f in &folds {
            let m = GaussianNb::fit(&t.select_rows(&f.train)).unwrap();
            hits += f.test.iter().filter(|&&i| m.predict(t.row(i)) == labels[i]).count();
        }
        assert_eq!(rep.overall.accuracy, hits as f64 / 8.0);
    }

    #[test]
    fn leave_one_out_single_class() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let t = DataTable::from_rows(&["x"], &rows, vec![0; 5], vec!["a".into()]).unwrap();
        let rep = cross_validate(|tr, _| GaussianNb::fit(tr), &t, 5, 1, 3).unwrap();
        assert_eq!(rep.overall.accuracy, 1.0);
        assert_eq!(rep.confusion.total(), 5);
    }
}
