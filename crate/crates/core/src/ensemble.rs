//! Uniform ensemble averaging, argmax decisions and subset enumeration.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::ingest::ModelPredictionSet;
use crate::model::{EnsembleSpec, LabelVector, ProbabilityMatrix};

/// Averaged rows are renormalized only when their sum drifts further than this.
const RENORMALIZE_DRIFT: f64 = 1e-12;

/// Inclusive bounds on ensemble size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetRange {
    min_size: usize,
    max_size: usize,
}

impl SubsetRange {
    pub fn new(min_size: usize, max_size: usize) -> Result<Self> {
        if min_size == 0 || max_size < min_size {
            return Err(Error::InvalidRange {
                min: min_size,
                max: max_size,
            });
        }
        Ok(Self { min_size, max_size })
    }

    pub fn min_size(&self) -> usize {
        self.min_size
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }
}

fn check_aligned(members: &[&ProbabilityMatrix]) -> Result<()> {
    let first = members.first().ok_or(Error::EmptyEnsemble)?;
    for (i, m) in members.iter().enumerate().skip(1) {
        if m.catalog() != first.catalog() {
            return Err(Error::AlignmentError(format!("member {i} uses a different class catalog")));
        }
        if m.ids() != first.ids() {
            return Err(Error::AlignmentError(format!(
                "member {i} has different sample ids or order"
            )));
        }
    }
    Ok(())
}

/// Entry-wise arithmetic mean of aligned probability matrices.
///
/// Each entry sums its member values in ascending order, so the result is
/// bitwise identical for any ordering of `members`.
pub fn average(members: &[&ProbabilityMatrix]) -> Result<ProbabilityMatrix> {
    average_with(members, Parallelism::Sequential)
}

pub fn average_with(members: &[&ProbabilityMatrix], mode: Parallelism) -> Result<ProbabilityMatrix> {
    check_aligned(members)?;
    let first = members[0];
    if members.len() == 1 {
        return Ok(first.clone());
    }
    let k = first.k();
    let count = members.len() as f64;
    let mut data = vec![0.0; first.as_flat().len()];
    exec::for_each_chunk_mut(&mut data, k, mode, |i, out| {
        let mut values = Vec::with_capacity(members.len());
        for (c, slot) in out.iter_mut().enumerate() {
            values.clear();
            values.extend(members.iter().map(|m| m.row(i)[c]));
            values.sort_unstable_by(f64::total_cmp);
            // Equal inputs return that value exactly, so duplicated members are a fixed point.
            *slot = if values[0] == values[values.len() - 1] {
                values[0]
            } else {
                values.iter().sum::<f64>() / count
            };
        }
        let sum: f64 = out.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_DRIFT {
            out.iter_mut().for_each(|v| *v /= sum);
        }
    });
    Ok(ProbabilityMatrix::from_parts_unchecked(
        first.ids().to_vec(),
        data,
        first.catalog().clone(),
    ))
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (c, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = c;
        }
    }
    best
}

pub fn argmax_predict(matrix: &ProbabilityMatrix) -> LabelVector {
    let labels = matrix.rows().map(argmax).collect();
    LabelVector::new(matrix.ids().to_vec(), labels, matrix.catalog())
        .expect("argmax indices are always inside the catalog")
}

/// All member subsets with size inside `range`, ordered by size and then
/// lexicographically by sorted member list.
pub fn enumerate_subsets(pool: &[String], range: SubsetRange) -> Result<Vec<EnsembleSpec>> {
    let mut sorted = pool.to_vec();
    sorted.sort();
    if let Some((dup, _)) = sorted.iter().tuple_windows().find(|(a, b)| a == b) {
        return Err(Error::DuplicateModelId(dup.clone()));
    }
    if range.max_size > sorted.len() {
        return Err(Error::RangeExceedsPool {
            max: range.max_size,
            pool: sorted.len(),
        });
    }
    let mut specs = Vec::new();
    for size in range.min_size..=range.max_size {
        for combo in sorted.iter().cloned().combinations(size) {
            specs.push(EnsembleSpec::new(combo)?);
        }
    }
    Ok(specs)
}

/// Averages the ensemble members' predictions and takes the argmax.
pub fn evaluate_ensemble(
    spec: &EnsembleSpec,
    set: &ModelPredictionSet,
) -> Result<(ProbabilityMatrix, LabelVector)> {
    evaluate_ensemble_with(spec, set, Parallelism::Sequential)
}

pub fn evaluate_ensemble_with(
    spec: &EnsembleSpec,
    set: &ModelPredictionSet,
    mode: Parallelism,
) -> Result<(ProbabilityMatrix, LabelVector)> {
    let members = spec
        .members()
        .iter()
        .map(|id| set.get(id))
        .collect::<Result<Vec<_>>>()?;
    let averaged = average_with(&members, mode)?;
    let predicted = argmax_predict(&averaged);
    Ok((averaged, predicted))
}
