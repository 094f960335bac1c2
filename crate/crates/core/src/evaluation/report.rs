use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::{self, ConfusionMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `FN / (FN + TP)`
    pub far: f64,
    /// Detection rate in percent.
    pub dr: f64,
    /// `FP / (FP + TN)`, diagnostic only.
    pub fpr: f64,
}

impl ClassMetrics {
    fn map2(a: &Self, b: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        ClassMetrics {
            precision: f(a.precision, b.precision),
            recall: f(a.recall, b.recall),
            f1: f(a.f1, b.f1),
            far: f(a.far, b.far),
            dr: f(a.dr, b.dr),
            fpr: f(a.fpr, b.fpr),
        }
    }

    fn scale(&self, s: f64) -> Self {
        Self::map2(self, self, |x, _| x * s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: String,
    pub support: u64,
    pub metrics: ClassMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AveragingScheme {
    #[default]
    Macro,
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overall {
    pub accuracy: f64,
    #[serde(rename = "macro")]
    pub macro_avg: ClassMetrics,
    pub weighted: ClassMetrics,
}

impl Overall {
    pub fn get(&self, scheme: AveragingScheme) -> &ClassMetrics {
        match scheme {
            AveragingScheme::Macro => &self.macro_avg,
            AveragingScheme::Weighted => &self.weighted,
        }
    }
}

/// Raw outcome of one cross-validation repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatResult {
    pub repeat: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

/// How fold and repeat results are combined.
pub const POOLING: &str =
    "confusion matrices pooled over folds within a repeat; metrics averaged over repeats";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub per_class: Vec<ClassReport>,
    pub overall: Overall,
    /// Which overall row is primary; both rows are always present.
    pub scheme: AveragingScheme,
    pub pooling: String,
    pub degenerate_flags: Vec<String>,
    pub per_repeat: Vec<RepeatResult>,
    /// Sum of all evaluated confusion matrices.
    pub confusion: ConfusionMatrix,
}

fn averages(per_class: &[ClassReport]) -> (ClassMetrics, ClassMetrics) {
    let k = per_class.len();
    if k == 0 {
        return Default::default();
    }
    let sum = per_class
        .iter()
        .fold(ClassMetrics::default(), |acc, c| ClassMetrics::map2(&acc, &c.metrics, |a, b| a + b));
    let macro_avg = sum.scale(1.0 / k as f64);
    let total: u64 = per_class.iter().map(|c| c.support).sum();
    let weighted = if total == 0 {
        ClassMetrics::default()
    } else {
        per_class
            .iter()
            .fold(ClassMetrics::default(), |acc, c| {
                ClassMetrics::map2(&acc, &c.metrics, |a, b| a + b * c.support as f64)
            })
            .scale(1.0 / total as f64)
    };
    (macro_avg, weighted)
}

impl Report {
    /// Metrics of a single confusion matrix.
    pub fn from_confusion(cm: &ConfusionMatrix) -> Report {
        let mut flags = Vec::new();
        if cm.total() == 0 {
            flags.push("overall: accuracy".to_owned());
        }
        let per_class: Vec<ClassReport> = (0..cm.n_classes())
            .map(|c| {
                let b = metrics::one_vs_rest(cm, c);
                let pr = metrics::precision(&b);
                let rc = metrics::recall(&b);
                for m in metrics::degenerate_metrics(&b) {
                    flags.push(format!("{}: {m}", cm.label_names[c]));
                }
                ClassReport {
                    class: cm.label_names[c].clone(),
                    support: cm.support(c),
                    metrics: ClassMetrics {
                        precision: pr,
                        recall: rc,
                        f1: metrics::f1(pr, rc),
                        far: metrics::far(&b),
                        dr: metrics::dr(&b),
                        fpr: metrics::fpr(&b),
                    },
                }
            })
            .collect();
        let (macro_avg, weighted) = averages(&per_class);
        Report {
            per_class,
            overall: Overall {
                accuracy: metrics::accuracy(cm),
                macro_avg,
                weighted,
            },
            scheme: AveragingScheme::Macro,
            pooling: POOLING.to_owned(),
            degenerate_flags: flags,
            per_repeat: Vec::new(),
            confusion: cm.clone(),
        }
    }

    pub fn primary(&self) -> &ClassMetrics {
        self.overall.get(self.scheme)
    }

    pub fn class(&self, name: &str) -> Option<&ClassReport> {
        self.per_class.iter().find(|c| c.class == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Per-class table (PR, RC, F1s, FAR, DR) followed by the overall rows
    /// (PR, RC, F1s, ACC, FAR, DR).
    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        s.push_str("| Class | PR | RC | F1s | FAR | DR |\n");
        s.push_str("|---|---|---|---|---|---|\n");
        for c in &self.per_class {
            let m = &c.metrics;
            let _ = writeln!(
                s,
                "| {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.2} |",
                c.class, m.precision, m.recall, m.f1, m.far, m.dr
            );
        }
        s.push('\n');
        s.push_str("| Averaging | PR | RC | F1s | ACC | FAR | DR |\n");
        s.push_str("|---|---|---|---|---|---|---|\n");
        for (name, m) in [("macro", &self.overall.macro_avg), ("weighted", &self.overall.weighted)] {
            let _ = writeln!(
                s,
                "| {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.2} |",
                name, m.precision, m.recall, m.f1, self.overall.accuracy, m.far, m.dr
            );
        }
        s
    }
}

/// Averages per-class metrics and accuracy over `reports` (e.g. repeats).
/// Supports, confusion matrices and per-repeat records are summed or
/// concatenated; both overall rows are recomputed from the averaged classes.
pub fn aggregate(reports: &[Report], scheme: AveragingScheme) -> Result<Report> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Empty("no reports to aggregate".into()))?;
    let names: Vec<&str> = first.per_class.iter().map(|c| c.class.as_str()).collect();
    for r in &reports[1..] {
        let other: Vec<&str> = r.per_class.iter().map(|c| c.class.as_str()).collect();
        if other != names {
            return Err(Error::LayoutMismatch("reports have different class sets".into()));
        }
    }
    let n = reports.len() as f64;
    let per_class: Vec<ClassReport> = (0..names.len())
        .map(|c| {
            let sum = reports.iter().fold(ClassMetrics::default(), |acc, r| {
                ClassMetrics::map2(&acc, &r.per_class[c].metrics, |a, b| a + b)
            });
            ClassReport {
                class: names[c].to_owned(),
                support: reports.iter().map(|r| r.per_class[c].support).sum(),
                metrics: sum.scale(1.0 / n),
            }
        })
        .collect();
    let (macro_avg, weighted) = averages(&per_class);
    let accuracy = reports.iter().map(|r| r.overall.accuracy).sum::<f64>() / n;
    let flags: BTreeSet<String> = reports
        .iter()
        .flat_map(|r| r.degenerate_flags.iter().cloned())
        .collect();
    let mut confusion = first.confusion.clone();
    for r in &reports[1..] {
        confusion.add(&r.confusion)?;
    }
    Ok(Report {
        per_class,
        overall: Overall {
            accuracy,
            macro_avg,
            weighted,
        },
        scheme,
        pooling: first.pooling.clone(),
        degenerate_flags: flags.into_iter().collect(),
        per_repeat: reports.iter().flat_map(|r| r.per_repeat.iter().cloned()).collect(),
        confusion,
    })
}
