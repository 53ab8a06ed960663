//! Confusion matrices and the weighted / macro / micro metric family.
//!
//! Counts stay integral until the final division; every ratio is computed in
//! f64. Macro averages divide by the catalog's class count k, including
//! classes with zero support.

use crate::error::{Error, Result};
use crate::model::{
    ClassCatalog, ClassStats, ConfusionMatrix, F1Mode, LabelVector, MetricsReport, PerClassStats,
};

/// Value used for precision or recall when its denominator is zero.
pub const ZERO_DIVISION: f64 = 0.0;

/// Weighted, macro and micro variants of one metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregates {
    pub weighted: f64,
    pub macro_avg: f64,
    pub micro: f64,
}

fn harmonic(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (ZERO_DIVISION, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn build_confusion(
    pred: &LabelVector,
    truth: &LabelVector,
    catalog: &ClassCatalog,
) -> Result<ConfusionMatrix> {
    if pred.ids() != truth.ids() {
        let detail = pred
            .ids()
            .iter()
            .zip(truth.ids())
            .position(|(a, b)| a != b)
            .map(|i| {
                format!(
                    "position {i}: predicted {} vs truth {}",
                    pred.ids()[i],
                    truth.ids()[i]
                )
            })
            .unwrap_or_else(|| format!("{} predictions vs {} labels", pred.len(), truth.len()));
        return Err(Error::IdMismatch(detail));
    }
    let k = catalog.k();
    let mut cm = ConfusionMatrix::zeros(catalog.clone());
    for (&p, &a) in pred.labels().iter().zip(truth.labels()) {
        if p >= k || a >= k {
            return Err(Error::InvalidLabels(format!(
                "class index {} outside a {k}-class catalog",
                p.max(a)
            )));
        }
        cm.increment(a, p);
    }
    Ok(cm)
}

pub fn per_class_stats(cm: &ConfusionMatrix) -> PerClassStats {
    let classes = (0..cm.k())
        .map(|c| {
            let tp = cm.get(c, c);
            let support = cm.row_sum(c);
            let predicted = cm.col_sum(c);
            let (precision, precision_undefined) = ratio(tp, predicted);
            let (recall, recall_undefined) = ratio(tp, support);
            ClassStats {
                tp,
                fp: predicted - tp,
                fn_: support - tp,
                support,
                precision,
                recall,
                f1: harmonic(precision, recall),
                precision_undefined,
                recall_undefined,
            }
        })
        .collect();
    PerClassStats { classes }
}

fn nonempty(cm: &ConfusionMatrix) -> Result<u64> {
    match cm.total() {
        0 => Err(Error::EmptyMatrix),
        total => Ok(total),
    }
}

/// Sum of true positives over the total sample count.
pub fn weighted_accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = nonempty(cm)?;
    Ok(cm.trace() as f64 / total as f64)
}

fn support_weighted(stats: &PerClassStats, total: u64, value: impl Fn(&ClassStats) -> f64) -> f64 {
    stats
        .classes
        .iter()
        .map(|s| value(s) * s.support as f64)
        .sum::<f64>()
        / total as f64
}

fn class_mean(stats: &PerClassStats, value: impl Fn(&ClassStats) -> f64) -> f64 {
    stats.classes.iter().map(value).sum::<f64>() / stats.k() as f64
}

fn totals(stats: &PerClassStats) -> (u64, u64, u64) {
    stats.classes.iter().fold((0, 0, 0), |(tp, fp, fn_), s| {
        (tp + s.tp, fp + s.fp, fn_ + s.fn_)
    })
}

fn precision_from(stats: &PerClassStats, total: u64) -> Aggregates {
    let (tp, fp, _) = totals(stats);
    Aggregates {
        weighted: support_weighted(stats, total, |s| s.precision),
        macro_avg: class_mean(stats, |s| s.precision),
        micro: ratio(tp, tp + fp).0,
    }
}

fn recall_from(stats: &PerClassStats, total: u64) -> Aggregates {
    let (tp, _, fn_) = totals(stats);
    Aggregates {
        weighted: support_weighted(stats, total, |s| s.recall),
        macro_avg: class_mean(stats, |s| s.recall),
        micro: ratio(tp, tp + fn_).0,
    }
}

fn f1_from(stats: &PerClassStats, total: u64, precision: &Aggregates, recall: &Aggregates, mode: F1Mode) -> Aggregates {
    let micro = harmonic(precision.micro, recall.micro);
    match mode {
        F1Mode::Definition => Aggregates {
            weighted: support_weighted(stats, total, |s| s.f1),
            macro_avg: class_mean(stats, |s| s.f1),
            micro,
        },
        F1Mode::PaperReplication => Aggregates {
            weighted: harmonic(precision.weighted, recall.weighted),
            macro_avg: harmonic(precision.macro_avg, recall.macro_avg),
            micro,
        },
    }
}

pub fn precision_family(cm: &ConfusionMatrix) -> Result<Aggregates> {
    let total = nonempty(cm)?;
    Ok(precision_from(&per_class_stats(cm), total))
}

pub fn recall_family(cm: &ConfusionMatrix) -> Result<Aggregates> {
    let total = nonempty(cm)?;
    Ok(recall_from(&per_class_stats(cm), total))
}

pub fn f1_family(cm: &ConfusionMatrix, mode: F1Mode) -> Result<Aggregates> {
    let total = nonempty(cm)?;
    let stats = per_class_stats(cm);
    let precision = precision_from(&stats, total);
    let recall = recall_from(&stats, total);
    Ok(f1_from(&stats, total, &precision, &recall, mode))
}

pub fn compute_report(cm: &ConfusionMatrix, mode: F1Mode) -> Result<MetricsReport> {
    let total = nonempty(cm)?;
    let per_class = per_class_stats(cm);
    let precision = precision_from(&per_class, total);
    let recall = recall_from(&per_class, total);
    let f1 = f1_from(&per_class, total, &precision, &recall, mode);
    Ok(MetricsReport {
        weighted_accuracy: cm.trace() as f64 / total as f64,
        weighted_precision: precision.weighted,
        macro_precision: precision.macro_avg,
        micro_precision: precision.micro,
        weighted_recall: recall.weighted,
        macro_recall: recall.macro_avg,
        micro_recall: recall.micro,
        weighted_f1: f1.weighted,
        macro_f1: f1.macro_avg,
        micro_f1: f1.micro,
        f1_mode: mode,
        per_class,
    })
}
