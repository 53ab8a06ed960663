//! Shared domain types: the class catalog, probability and label data,
//! confusion matrices, metric reports and ensemble specifications.
//!
//! Every type here is an immutable value once constructed. Constructors
//! validate their invariants, so holding a value is proof that it is valid.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of a probability row sum from 1.0.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Ordered list of class display names. Index `c` in every matrix refers to `names[c]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct ClassCatalog {
    names: Vec<String>,
}

impl ClassCatalog {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(Error::InvalidCatalog(format!(
                "need at least 2 classes, got {}",
                names.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if name.trim().is_empty() {
                return Err(Error::InvalidCatalog("empty class name".into()));
            }
            if name.contains([',', '\n', '\r']) {
                return Err(Error::InvalidCatalog(format!(
                    "class name {name:?} contains a separator character"
                )));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidCatalog(format!("duplicate class name {name:?}")));
            }
        }
        Ok(Self { names })
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Resolves a label written either as a class name or as a zero-based index.
    pub fn resolve(&self, token: &str) -> Option<usize> {
        let token = token.trim();
        self.index_of(token).or_else(|| {
            token
                .parse::<usize>()
                .ok()
                .filter(|&index| index < self.k())
        })
    }
}

impl TryFrom<Vec<String>> for ClassCatalog {
    type Error = Error;

    fn try_from(names: Vec<String>) -> Result<Self> {
        ClassCatalog::new(names)
    }
}

impl From<ClassCatalog> for Vec<String> {
    fn from(catalog: ClassCatalog) -> Self {
        catalog.names
    }
}

/// The four-class dementia-stage catalog, in directory order.
pub fn default_catalog() -> ClassCatalog {
    ClassCatalog {
        names: vec![
            "Mild_Demented".to_owned(),
            "Moderate_Demented".to_owned(),
            "Non_Demented".to_owned(),
            "Very_Mild_Demented".to_owned(),
        ],
    }
}

/// Opaque sample identifier. Non-empty and free of field separators.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SampleId(String);

impl SampleId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::InvalidSampleId {
                id,
                reason: "empty",
            });
        }
        if id.contains([',', '\n', '\r', '\t']) {
            return Err(Error::InvalidSampleId {
                id,
                reason: "contains a field separator",
            });
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for SampleId {
    type Error = Error;

    fn try_from(id: String) -> Result<Self> {
        SampleId::new(id)
    }
}

impl From<SampleId> for String {
    fn from(id: SampleId) -> Self {
        id.0
    }
}

impl fmt::Display for SampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Why a probability row was rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum RowFault {
    Width(usize),
    Domain(f64),
    Sum(f64),
}

/// Validates one probability row in place. Entries within `slack` outside
/// [0, 1] are clamped; a row whose sum is within [`ROW_SUM_TOLERANCE`] of 1.0
/// is divided by its sum.
pub(crate) fn normalize_row(row: &mut [f64], k: usize, slack: f64) -> Result<(), RowFault> {
    if row.len() != k {
        return Err(RowFault::Width(row.len()));
    }
    for v in row.iter_mut() {
        if !v.is_finite() || *v < -slack || *v > 1.0 + slack {
            return Err(RowFault::Domain(*v));
        }
        *v = v.clamp(0.0, 1.0);
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(RowFault::Sum(sum));
    }
    if sum != 1.0 {
        row.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(())
}

fn check_unique_ids(ids: &[SampleId]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if !seen.insert(id) {
            return Err(Error::DuplicateId {
                line: i as u64 + 1,
                id: id.to_string(),
            });
        }
    }
    Ok(())
}

/// N x k matrix of per-sample class probabilities, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    ids: Vec<SampleId>,
    data: Vec<f64>,
    catalog: ClassCatalog,
}

impl ProbabilityMatrix {
    pub fn new(ids: Vec<SampleId>, rows: Vec<Vec<f64>>, catalog: ClassCatalog) -> Result<Self> {
        if rows.len() != ids.len() {
            return Err(Error::InvalidMatrix(format!(
                "{} ids but {} rows",
                ids.len(),
                rows.len()
            )));
        }
        let k = catalog.k();
        let mut data = Vec::with_capacity(rows.len() * k);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidMatrix(format!(
                    "row {} has {} entries, expected {k}",
                    ids[i],
                    row.len()
                )));
            }
            data.extend(row);
        }
        Self::from_flat(ids, data, catalog)
    }

    /// Builds a matrix from row-major data, validating and renormalizing every row.
    pub fn from_flat(ids: Vec<SampleId>, mut data: Vec<f64>, catalog: ClassCatalog) -> Result<Self> {
        let k = catalog.k();
        if ids.is_empty() {
            return Err(Error::InvalidMatrix("no samples".into()));
        }
        if data.len() != ids.len() * k {
            return Err(Error::InvalidMatrix(format!(
                "expected {} values for {} rows of {k}, got {}",
                ids.len() * k,
                ids.len(),
                data.len()
            )));
        }
        check_unique_ids(&ids)?;
        for (id, row) in ids.iter().zip(data.chunks_exact_mut(k)) {
            normalize_row(row, k, 0.0).map_err(|fault| match fault {
                RowFault::Width(w) => {
                    Error::InvalidMatrix(format!("row {id} has {w} entries, expected {k}"))
                }
                RowFault::Domain(v) => {
                    Error::InvalidMatrix(format!("row {id} has entry {v} outside [0, 1]"))
                }
                RowFault::Sum(s) => Error::InvalidMatrix(format!("row {id} sums to {s}")),
            })?;
        }
        Ok(Self { ids, data, catalog })
    }

    /// Skips validation; callers guarantee rows already satisfy the invariants.
    pub(crate) fn from_parts_unchecked(
        ids: Vec<SampleId>,
        data: Vec<f64>,
        catalog: ClassCatalog,
    ) -> Self {
        debug_assert_eq!(data.len(), ids.len() * catalog.k());
        Self { ids, data, catalog }
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn k(&self) -> usize {
        self.catalog.k()
    }

    pub fn ids(&self) -> &[SampleId] {
        &self.ids
    }

    pub fn catalog(&self) -> &ClassCatalog {
        &self.catalog
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.k();
        &self.data[i * k..(i + 1) * k]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.k())
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Returns a copy with rows permuted so that `ids` follows `order`.
    /// `order` must be a permutation of this matrix's ids.
    pub fn reordered(&self, order: &[SampleId]) -> Result<Self> {
        let position: std::collections::HashMap<&SampleId, usize> =
            self.ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
        if order.len() != self.ids.len() {
            return Err(Error::IdMismatch(format!(
                "{} ids requested, matrix has {}",
                order.len(),
                self.ids.len()
            )));
        }
        let k = self.k();
        let mut data = Vec::with_capacity(self.data.len());
        for id in order {
            let i = *position
                .get(id)
                .ok_or_else(|| Error::IdMismatch(format!("id {id} not in matrix")))?;
            data.extend_from_slice(&self.data[i * k..(i + 1) * k]);
        }
        Ok(Self {
            ids: order.to_vec(),
            data,
            catalog: self.catalog.clone(),
        })
    }
}

/// Class indices aligned to sample ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    ids: Vec<SampleId>,
    labels: Vec<usize>,
}

impl LabelVector {
    pub fn new(ids: Vec<SampleId>, labels: Vec<usize>, catalog: &ClassCatalog) -> Result<Self> {
        if ids.len() != labels.len() {
            return Err(Error::InvalidLabels(format!(
                "{} ids but {} labels",
                ids.len(),
                labels.len()
            )));
        }
        if let Some((id, &label)) = ids
            .iter()
            .zip(&labels)
            .find(|(_, &label)| label >= catalog.k())
        {
            return Err(Error::InvalidLabels(format!(
                "sample {id} has class index {label}, catalog has {} classes",
                catalog.k()
            )));
        }
        check_unique_ids(&ids)?;
        Ok(Self { ids, labels })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[SampleId] {
        &self.ids
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SampleId, usize)> + '_ {
        self.ids.iter().zip(self.labels.iter().copied())
    }
}

/// k x k counts, rows = actual class, columns = predicted class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: Vec<u64>,
    catalog: ClassCatalog,
}

impl ConfusionMatrix {
    pub fn zeros(catalog: ClassCatalog) -> Self {
        let k = catalog.k();
        Self {
            counts: vec![0; k * k],
            catalog,
        }
    }

    pub fn from_rows(rows: Vec<Vec<u64>>, catalog: ClassCatalog) -> Result<Self> {
        let k = catalog.k();
        if rows.len() != k || rows.iter().any(|r| r.len() != k) {
            let widths: Vec<usize> = rows.iter().map(Vec::len).collect();
            return Err(Error::ShapeMismatch(format!(
                "expected {k}x{k} grid, got {} rows of widths {widths:?}",
                rows.len()
            )));
        }
        Ok(Self {
            counts: rows.into_iter().flatten().collect(),
            catalog,
        })
    }

    pub(crate) fn increment(&mut self, actual: usize, predicted: usize) {
        let k = self.k();
        self.counts[actual * k + predicted] += 1;
    }

    pub fn k(&self) -> usize {
        self.catalog.k()
    }

    pub fn catalog(&self) -> &ClassCatalog {
        &self.catalog
    }

    pub fn get(&self, actual: usize, predicted: usize) -> u64 {
        self.counts[actual * self.k() + predicted]
    }

    pub fn row(&self, actual: usize) -> &[u64] {
        let k = self.k();
        &self.counts[actual * k..(actual + 1) * k]
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks_exact(self.k()).map(<[u64]>::to_vec).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k()).map(|c| self.get(c, c)).sum()
    }

    /// Support of class `actual`.
    pub fn row_sum(&self, actual: usize) -> u64 {
        self.row(actual).iter().sum()
    }

    /// Number of samples predicted as `predicted`.
    pub fn col_sum(&self, predicted: usize) -> u64 {
        (0..self.k()).map(|a| self.get(a, predicted)).sum()
    }

    /// Relabels classes: class `c` of the result is class `perm[c]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let k = self.k();
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..k).collect::<Vec<_>>() {
            return Err(Error::ShapeMismatch(format!(
                "{perm:?} is not a permutation of 0..{k}"
            )));
        }
        let catalog = ClassCatalog::new(perm.iter().map(|&c| self.catalog.name(c).to_owned()))?;
        let rows = perm
            .iter()
            .map(|&a| perm.iter().map(|&p| self.get(a, p)).collect())
            .collect();
        Self::from_rows(rows, catalog)
    }
}

/// How aggregate (weighted and macro) F1 scores are formed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum F1Mode {
    /// Support-weighted mean and plain mean of per-class F1 scores.
    #[default]
    Definition,
    /// Harmonic mean of the matching aggregate precision and recall.
    PaperReplication,
}

impl F1Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            F1Mode::Definition => "definition",
            F1Mode::PaperReplication => "paper-replication",
        }
    }
}

impl fmt::Display for F1Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for F1Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "definition" => Ok(F1Mode::Definition),
            "paper-replication" | "paper_replication" => Ok(F1Mode::PaperReplication),
            other => Err(format!(
                "unknown F1 mode {other:?} (expected definition or paper-replication)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when tp + fp == 0 and precision fell back to the zero-division value.
    pub precision_undefined: bool,
    /// Set when the class has no support and recall fell back to the zero-division value.
    pub recall_undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerClassStats {
    pub classes: Vec<ClassStats>,
}

impl PerClassStats {
    pub fn k(&self) -> usize {
        self.classes.len()
    }
}

/// The ten scalar metrics plus per-class statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub weighted_accuracy: f64,
    pub weighted_precision: f64,
    pub macro_precision: f64,
    pub micro_precision: f64,
    pub weighted_recall: f64,
    pub macro_recall: f64,
    pub micro_recall: f64,
    pub weighted_f1: f64,
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub f1_mode: F1Mode,
    pub per_class: PerClassStats,
}

impl MetricsReport {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::WeightedAccuracy => self.weighted_accuracy,
            Metric::WeightedPrecision => self.weighted_precision,
            Metric::MacroPrecision => self.macro_precision,
            Metric::MicroPrecision => self.micro_precision,
            Metric::WeightedRecall => self.weighted_recall,
            Metric::MacroRecall => self.macro_recall,
            Metric::MicroRecall => self.micro_recall,
            Metric::WeightedF1 => self.weighted_f1,
            Metric::MacroF1 => self.macro_f1,
            Metric::MicroF1 => self.micro_f1,
        }
    }

    /// All ten scalars in table column order.
    pub fn scalars(&self) -> [f64; 10] {
        Metric::ALL.map(|m| self.get(m))
    }
}

/// One of the ten scalar metrics, in table column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    WeightedAccuracy,
    WeightedPrecision,
    MacroPrecision,
    MicroPrecision,
    WeightedRecall,
    MacroRecall,
    MicroRecall,
    WeightedF1,
    MacroF1,
    MicroF1,
}

impl Metric {
    pub const ALL: [Metric; 10] = [
        Metric::WeightedAccuracy,
        Metric::WeightedPrecision,
        Metric::MacroPrecision,
        Metric::MicroPrecision,
        Metric::WeightedRecall,
        Metric::MacroRecall,
        Metric::MicroRecall,
        Metric::WeightedF1,
        Metric::MacroF1,
        Metric::MicroF1,
    ];

    /// Snake-case key used in csv headers and json objects.
    pub fn key(self) -> &'static str {
        match self {
            Metric::WeightedAccuracy => "weighted_accuracy",
            Metric::WeightedPrecision => "weighted_precision",
            Metric::MacroPrecision => "macro_precision",
            Metric::MicroPrecision => "micro_precision",
            Metric::WeightedRecall => "weighted_recall",
            Metric::MacroRecall => "macro_recall",
            Metric::MicroRecall => "micro_recall",
            Metric::WeightedF1 => "weighted_f1",
            Metric::MacroF1 => "macro_f1",
            Metric::MicroF1 => "micro_f1",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let normalized = s.replace('-', "_");
        Metric::ALL
            .into_iter()
            .find(|m| m.key() == normalized)
            .ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

/// Checks that `id` is usable as a model id token.
pub fn validate_model_id(id: &str) -> Result<()> {
    let reason = if id.is_empty() {
        "empty"
    } else if id.chars().any(|c| c.is_whitespace() || matches!(c, '+' | ',' | '=')) {
        "contains whitespace, '+', ',' or '='"
    } else {
        return Ok(());
    };
    Err(Error::InvalidModelId {
        id: id.to_owned(),
        reason,
    })
}

/// An unordered, non-empty set of model ids to be averaged together.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EnsembleSpec {
    members: Vec<String>,
    display_name: String,
}

impl EnsembleSpec {
    pub fn new<I, S>(members: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = BTreeSet::new();
        for member in members {
            let member = member.into();
            validate_model_id(&member)?;
            if set.contains(&member) {
                return Err(Error::DuplicateModelId(member));
            }
            set.insert(member);
        }
        if set.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let members: Vec<String> = set.into_iter().collect();
        let display_name = members.join("+");
        Ok(Self {
            members,
            display_name,
        })
    }

    /// Parses a `+`-joined member list such as `incep+effnet+res50`.
    pub fn parse(name: &str) -> Result<Self> {
        Self::new(name.split('+').map(str::trim))
    }

    /// Members in sorted order.
    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn display_name(&self) -> &str {
        &self.display_name
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl fmt::Display for EnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_name)
    }
}
