//! Synthetic prediction data realizing a target confusion matrix, and a
//! brute-force metric oracle that never forms a confusion matrix.
//!
//! Shuffling is Fisher-Yates driven by ChaCha20 keyed with the seed as eight
//! little-endian bytes followed by 24 zero bytes: for `i` from `n-1` down to
//! 1, swap position `i` with `next_u64() % (i + 1)`. Sample ids are
//! `s<seed>-<position>` with the position zero-padded to six digits.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::model::{
    ClassCatalog, ClassStats, ConfusionMatrix, F1Mode, LabelVector, MetricsReport, PerClassStats,
    ProbabilityMatrix, SampleId,
};

pub const DEFAULT_SHARPNESS: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    pub predictions: ProbabilityMatrix,
    pub labels: LabelVector,
}

/// The sharpness must exceed the uniform share 1/k and be at most 1.
pub fn check_sharpness(sharpness: f64, k: usize) -> Result<()> {
    if sharpness.is_finite() && sharpness > 1.0 / k as f64 && sharpness <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidSharpness { sharpness, k })
    }
}

/// Probability row peaked at `predicted`: `sharpness + (1 - sharpness) / k`
/// there and `(1 - sharpness) / k` everywhere else.
pub fn peaked_row(predicted: usize, k: usize, sharpness: f64) -> Vec<f64> {
    let floor = (1.0 - sharpness) / k as f64;
    let mut row = vec![floor; k];
    row[predicted] = sharpness + floor;
    row
}

fn shuffle<T>(items: &mut [T], seed: u64) {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

pub fn generate_from_confusion(cm: &ConfusionMatrix, seed: u64, sharpness: f64) -> Result<Synthesized> {
    let k = cm.k();
    check_sharpness(sharpness, k)?;
    if cm.total() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut cells: Vec<(usize, usize)> = Vec::with_capacity(cm.total() as usize);
    for actual in 0..k {
        for predicted in 0..k {
            cells.extend(std::iter::repeat_n((actual, predicted), cm.get(actual, predicted) as usize));
        }
    }
    shuffle(&mut cells, seed);

    let catalog = cm.catalog().clone();
    let ids: Vec<SampleId> = (0..cells.len())
        .map(|i| SampleId::new(format!("s{seed}-{i:06}")))
        .collect::<Result<_>>()?;
    let rows = cells.iter().map(|&(_, p)| peaked_row(p, k, sharpness)).collect();
    let labels = cells.iter().map(|&(a, _)| a).collect();
    Ok(Synthesized {
        predictions: ProbabilityMatrix::new(ids.clone(), rows, catalog.clone())?,
        labels: LabelVector::new(ids, labels, &catalog)?,
    })
}

/// Computes every metric by scanning all samples once per class.
/// Used as an independent test oracle for the metrics engine.
pub fn brute_force_metrics(
    pred: &LabelVector,
    truth: &LabelVector,
    catalog: &ClassCatalog,
    mode: F1Mode,
) -> Result<MetricsReport> {
    if pred.ids() != truth.ids() {
        return Err(Error::IdMismatch("prediction and truth ids differ".into()));
    }
    let n = truth.len();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let k = catalog.k();
    let pairs: Vec<(usize, usize)> = pred
        .labels()
        .iter()
        .copied()
        .zip(truth.labels().iter().copied())
        .collect();

    let mut classes = Vec::with_capacity(k);
    for c in 0..k {
        let mut tp = 0u64;
        let mut fp = 0u64;
        let mut fn_ = 0u64;
        for &(p, t) in &pairs {
            match (p == c, t == c) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        let support = tp + fn_;
        let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
        let recall = if support > 0 { tp as f64 / support as f64 } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        classes.push(ClassStats {
            tp,
            fp,
            fn_,
            support,
            precision,
            recall,
            f1,
            precision_undefined: tp + fp == 0,
            recall_undefined: support == 0,
        });
    }

    let correct = pairs.iter().filter(|(p, t)| p == t).count() as f64;
    let n_f = n as f64;
    let k_f = k as f64;
    let (mut sum_tp, mut sum_fp, mut sum_fn) = (0u64, 0u64, 0u64);
    let (mut wp, mut wr, mut wf, mut mp, mut mr, mut mf) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for s in &classes {
        sum_tp += s.tp;
        sum_fp += s.fp;
        sum_fn += s.fn_;
        let weight = s.support as f64;
        wp += s.precision * weight;
        wr += s.recall * weight;
        wf += s.f1 * weight;
        mp += s.precision;
        mr += s.recall;
        mf += s.f1;
    }
    let hm = |a: f64, b: f64| if a + b > 0.0 { 2.0 * a * b / (a + b) } else { 0.0 };
    let micro_precision = sum_tp as f64 / (sum_tp + sum_fp) as f64;
    let micro_recall = sum_tp as f64 / (sum_tp + sum_fn) as f64;
    let (weighted_precision, weighted_recall) = (wp / n_f, wr / n_f);
    let (macro_precision, macro_recall) = (mp / k_f, mr / k_f);
    let (weighted_f1, macro_f1) = match mode {
        F1Mode::Definition => (wf / n_f, mf / k_f),
        F1Mode::PaperReplication => (
            hm(weighted_precision, weighted_recall),
            hm(macro_precision, macro_recall),
        ),
    };
    Ok(MetricsReport {
        weighted_accuracy: correct / n_f,
        weighted_precision,
        macro_precision,
        micro_precision,
        weighted_recall,
        macro_recall,
        micro_recall,
        weighted_f1,
        macro_f1,
        micro_f1: hm(micro_precision, micro_recall),
        f1_mode: mode,
        per_class: PerClassStats { classes },
    })
}
