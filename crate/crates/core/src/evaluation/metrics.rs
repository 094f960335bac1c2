use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `counts[i][j]` = rows of true class `i` predicted as `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
    pub label_names: Vec<String>,
}

/// One-vs-rest counts for a single class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct BinaryCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn zeros(label_names: Vec<String>) -> Self {
        let k = label_names.len();
        ConfusionMatrix {
            counts: vec![vec![0; k]; k],
            label_names,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    /// Rows whose true class is `c`.
    pub fn support(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.n_classes() != self.n_classes() {
            return Err(Error::LengthMismatch(
                "confusion matrices have different class counts".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }
}

/// Counts true/predicted code pairs into a K x K matrix.
pub fn confusion(y_true: &[usize], y_pred: &[usize], label_names: &[String]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch(format!(
            "{} true labels vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let k = label_names.len();
    let mut cm = ConfusionMatrix::zeros(label_names.to_vec());
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if let Some(&code) = [t, p].iter().find(|&&c| c >= k) {
            return Err(Error::CodeOutOfRange { code, n_classes: k });
        }
        cm.counts[t][p] += 1;
    }
    Ok(cm)
}

/// Unnamed variant of [`confusion`] for `k` classes named by their codes.
pub fn confusion_k(y_true: &[usize], y_pred: &[usize], k: usize) -> Result<ConfusionMatrix> {
    let names: Vec<String> = (0..k).map(|c| c.to_string()).collect();
    confusion(y_true, y_pred, &names)
}

pub fn one_vs_rest(cm: &ConfusionMatrix, c: usize) -> BinaryCounts {
    let k = cm.n_classes();
    let tp = cm.counts[c][c];
    let fn_: u64 = (0..k).filter(|&j| j != c).map(|j| cm.counts[c][j]).sum();
    let fp: u64 = (0..k).filter(|&i| i != c).map(|i| cm.counts[i][c]).sum();
    BinaryCounts {
        tp,
        fp,
        fn_,
        tn: cm.total() - tp - fn_ - fp,
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Multiclass accuracy `trace / total`.
pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.trace(), cm.total())
}

/// `RC = TP / (TP + FN)`
pub fn recall(b: &BinaryCounts) -> f64 {
    ratio(b.tp, b.tp + b.fn_)
}

/// `PR = TP / (TP + FP)`
pub fn precision(b: &BinaryCounts) -> f64 {
    ratio(b.tp, b.tp + b.fp)
}

/// `F1s = 2 * RC * PR / (RC + PR)`
pub fn f1(pr: f64, rc: f64) -> f64 {
    if pr + rc == 0.0 {
        0.0
    } else {
        2.0 * (rc * pr) / (rc + pr)
    }
}

/// `FAR = FN / (FN + TP)`, the missed fraction of the class.
pub fn far(b: &BinaryCounts) -> f64 {
    ratio(b.fn_, b.fn_ + b.tp)
}

/// `DR = TP / (TP + FN) * 100`
pub fn dr(b: &BinaryCounts) -> f64 {
    ratio(b.tp, b.tp + b.fn_) * 100.0
}

/// Conventional false-positive rate `FP / (FP + TN)`.
pub fn fpr(b: &BinaryCounts) -> f64 {
    ratio(b.fp, b.fp + b.tn)
}

/// Names of the metrics of `b` whose denominator is zero.
pub fn degenerate_metrics(b: &BinaryCounts) -> Vec<&'static str> {
    let mut out = Vec::new();
    if b.tp + b.fp == 0 {
        out.push("precision");
    }
    if b.tp + b.fn_ == 0 {
        out.extend(["recall", "far", "dr"]);
    }
    if precision(b) + recall(b) == 0.0 {
        out.push("f1");
    }
    if b.fp + b.tn == 0 {
        out.push("fpr");
    }
    out
}
