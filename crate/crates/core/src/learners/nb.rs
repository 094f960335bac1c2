use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::dataio::DataTable;
use crate::error::{Error, Result};

/// Relative variance floor: variances are raised to at least this fraction
/// of the largest feature variance in the training data.
pub const VAR_SMOOTHING: f64 = 1e-9;

/// Gaussian Naive Bayes with per-(class, feature) mean and variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    priors: Vec<f64>,
    /// `means[c][j]`
    means: Vec<Vec<f64>>,
    /// `variances[c][j]`, already floored
    variances: Vec<Vec<f64>>,
    var_floor: f64,
    /// `-0.5 * sum_j ln(2 pi var[c][j])` per class
    log_norm: Vec<f64>,
}

impl GaussianNb {
    /// Priors are class frequencies, variances are population variances.
    /// Classes without rows get prior 0 and never win a prediction.
    pub fn fit(table: &DataTable) -> Result<Self> {
        let n = table.n_rows();
        if n == 0 {
            return Err(Error::Empty("naive bayes needs at least one row".into()));
        }
        let k = table.n_classes();
        let f = table.n_features();
        let counts = table.class_counts();
        let mut sums = vec![vec![0.0; f]; k];
        for (row, &c) in table.rows().zip(table.labels()) {
            for (s, x) in sums[c].iter_mut().zip(row) {
                *s += x;
            }
        }
        let means: Vec<Vec<f64>> = sums
            .iter()
            .zip(&counts)
            .map(|(s, &nc)| {
                if nc == 0 {
                    vec![0.0; f]
                } else {
                    s.iter().map(|v| v / nc as f64).collect()
                }
            })
            .collect();
        let mut sq = vec![vec![0.0; f]; k];
        for (row, &c) in table.rows().zip(table.labels()) {
            for ((s, x), m) in sq[c].iter_mut().zip(row).zip(&means[c]) {
                let d = x - m;
                *s += d * d;
            }
        }

        let max_var = (0..f)
            .map(|j| population_variance(table, j))
            .fold(0.0, f64::max);
        let mut var_floor = VAR_SMOOTHING * max_var;
        if var_floor <= 0.0 {
            // every feature constant: any positive floor keeps densities finite
            var_floor = VAR_SMOOTHING;
        }

        let variances: Vec<Vec<f64>> = sq
            .iter()
            .zip(&counts)
            .map(|(s, &nc)| {
                s.iter()
                    .map(|v| {
                        let var = if nc == 0 { 0.0 } else { v / nc as f64 };
                        var.max(var_floor)
                    })
                    .collect()
            })
            .collect();
        let log_norm = variances
            .iter()
            .map(|vs| {
                -0.5 * vs
                    .iter()
                    .map(|v| (2.0 * std::f64::consts::PI * v).ln())
                    .sum::<f64>()
            })
            .collect();
        let priors = counts.iter().map(|&c| c as f64 / n as f64).collect();
        Ok(GaussianNb {
            priors,
            means,
            variances,
            var_floor,
            log_norm,
        })
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn variances(&self) -> &[Vec<f64>] {
        &self.variances
    }

    pub fn var_floor(&self) -> f64 {
        self.var_floor
    }

    pub fn n_features(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    /// Unnormalized log posterior per class; `-inf` for empty classes.
    pub fn joint_log_likelihood(&self, row: &[f64]) -> Vec<f64> {
        (0..self.priors.len())
            .map(|c| {
                if self.priors[c] == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let quad: f64 = row
                    .iter()
                    .zip(&self.means[c])
                    .zip(&self.variances[c])
                    .map(|((x, m), v)| {
                        let d = x - m;
                        d * d / v
                    })
                    .sum();
                self.priors[c].ln() + self.log_norm[c] - 0.5 * quad
            })
            .collect()
    }
}

fn population_variance(table: &DataTable, j: usize) -> f64 {
    let n = table.n_rows() as f64;
    let mean = (0..table.n_rows()).map(|r| table.value(r, j)).sum::<f64>() / n;
    (0..table.n_rows())
        .map(|r| {
            let d = table.value(r, j) - mean;
            d * d
        })
        .sum::<f64>()
        / n
}

/// Normalizes log weights into probabilities via log-sum-exp.
pub(crate) fn softmax_log(log_weights: &[f64]) -> Vec<f64> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        let k = log_weights.len() as f64;
        return vec![1.0 / k; log_weights.len()];
    }
    let exps: Vec<f64> = log_weights.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

impl Classifier for GaussianNb {
    fn n_classes(&self) -> usize {
        self.priors.len()
    }

    fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        softmax_log(&self.joint_log_likelihood(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_class() -> DataTable {
        DataTable::from_rows(
            &["x"],
            &[vec![0.0], vec![0.2], vec![0.8], vec![1.0]],
            vec![0, 0, 1, 1],
            vec!["A".into(), "B".into()],
        )
        .unwrap()
    }

    #[test]
    fn fit_means_and_priors() {
        let m = GaussianNb::fit(&two_class()).unwrap();
        assert_eq!(m.priors(), [0.5, 0.5]);
        assert!((m.means()[0][0] - 0.1).abs() < 1e-15);
        assert!((m.means()[1][0] - 0.9).abs() < 1e-15);
        // population variance of {0, 0.2}
        assert!((m.variances()[0][0] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn posterior_at_class_mean() {
        let m = GaussianNb::fit(&two_class()).unwrap();
        let p = m.predict_proba(&[0.1]);
        assert_eq!(m.predict(&[0.1]), 0);
        // closed form: equal priors and variances 0.01, distances 0 and 0.8
        // ratio B/A = exp(-0.64 / 0.02)
        let ratio: f64 = (-0.64f64 / 0.02).exp();
        assert!((p[1] - ratio / (1.0 + ratio)).abs() < 1e-12);
        assert!(((p[0] + p[1]) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_point_is_even() {
        let m = GaussianNb::fit(&two_class()).unwrap();
        let p = m.predict_proba(&[0.5]);
        assert!((p[0] - 0.5).abs() < 1e-9 && (p[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn identical_statistics_give_priors() {
        let t = DataTable::from_rows(
            &["x"],
            &[vec![0.0], vec![1.0], vec![0.0], vec![1.0], vec![0.0], vec![1.0]],
            vec![0, 0, 1, 1, 1, 1],
            vec!["A".into(), "B".into()],
        )
        .unwrap();
        let m = GaussianNb::fit(&t).unwrap();
        let p = m.predict_proba(&[0.3]);
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_class_and_constant_feature() {
        let t = DataTable::from_rows(
            &["c", "x"],
            &[vec![5.0, 0.0], vec![5.0, 2.0]],
            vec![0, 0],
            vec!["only".into()],
        )
        .unwrap();
        let m = GaussianNb::fit(&t).unwrap();
        assert_eq!(m.priors(), [1.0]);
        assert_eq!(m.variances()[0][0], m.var_floor());
        assert!(m.var_floor() > 0.0);
        assert_eq!(m.predict_proba(&[5.0, 1.0]), [1.0]);
    }

    #[test]
    fn empty_class_never_predicted() {
        let t = DataTable::from_rows(
            &["x"],
            &[vec![0.0], vec![1.0]],
            vec![0, 0],
            vec!["A".into(), "B".into()],
        )
        .unwrap();
        let m = GaussianNb::fit(&t).unwrap();
        assert_eq!(m.predict_proba(&[100.0]), [1.0, 0.0]);
    }

    #[test]
    fn empty_table_errors() {
        let t = DataTable::from_rows(&["x"], &[], vec![], vec!["A".into()]).unwrap();
        assert!(GaussianNb::fit(&t).is_err());
    }

    #[test]
    fn far_points_do_not_underflow() {
        let m = GaussianNb::fit(&two_class()).unwrap();
        let p = m.predict_proba(&[1e6]);
        assert!(p.iter().all(|v| v.is_finite()));
        assert!(((p[0] + p[1]) - 1.0).abs() < 1e-9);
        assert_eq!(m.predict(&[1e6]), 1);
    }
}
