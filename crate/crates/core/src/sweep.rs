//! End-to-end evaluation of many ensembles over one prediction set.

use crate::ensemble::evaluate_ensemble_with;
use crate::error::Result;
use crate::exec::{self, Parallelism};
use crate::ingest::ModelPredictionSet;
use crate::metrics::{build_confusion, compute_report};
use crate::model::{ConfusionMatrix, EnsembleSpec, F1Mode, MetricsReport};

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub spec: EnsembleSpec,
    pub confusion: ConfusionMatrix,
    pub report: MetricsReport,
}

pub fn evaluate(
    spec: &EnsembleSpec,
    set: &ModelPredictionSet,
    f1_mode: F1Mode,
    mode: Parallelism,
) -> Result<Evaluation> {
    let (_, predicted) = evaluate_ensemble_with(spec, set, mode)?;
    let confusion = build_confusion(&predicted, set.labels(), set.catalog())?;
    let report = compute_report(&confusion, f1_mode)?;
    Ok(Evaluation {
        spec: spec.clone(),
        confusion,
        report,
    })
}

/// Evaluates every spec, returning results in the order of `specs`.
/// Work is split across subsets; each subset is averaged sequentially.
pub fn sweep(
    set: &ModelPredictionSet,
    specs: &[EnsembleSpec],
    f1_mode: F1Mode,
    mode: Parallelism,
) -> Result<Vec<Evaluation>> {
    exec::try_map_ordered(specs, mode, |spec| {
        evaluate(spec, set, f1_mode, Parallelism::Sequential)
    })
}
