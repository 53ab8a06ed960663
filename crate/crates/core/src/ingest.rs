//! Readers and writers for prediction files, label files, confusion fixtures
//! and manifests, plus alignment of several models' predictions.
//!
//! Prediction file: header `id,<class 1>,...,<class k>` then one row per sample.
//! Label file: header `id,label`, label given as class name or zero-based index.
//! Confusion fixture: a `model=<members>` line then k lines of k integers,
//! rows = actual class. Lines starting with `#` are comments in all formats.
//! Manifest: `model-id=path` lines plus an optional `labels=path` line.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::model::{
    normalize_row, validate_model_id, ClassCatalog, ConfusionMatrix, LabelVector,
    ProbabilityMatrix, RowFault, SampleId,
};

/// Entries may sit this far outside [0, 1] before clamping.
const DOMAIN_SLACK: f64 = 1e-9;

/// Reserved manifest key for the label file.
pub const LABELS_KEY: &str = "labels";

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader)
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    Error::MalformedFile {
        line,
        reason: err.to_string(),
    }
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn sample_id(token: &str, line: u64) -> Result<SampleId> {
    SampleId::new(token).map_err(|e| Error::MalformedFile {
        line,
        reason: e.to_string(),
    })
}

pub fn load_predictions(path: impl AsRef<Path>, catalog: &ClassCatalog) -> Result<ProbabilityMatrix> {
    let path = path.as_ref();
    read_predictions(open(path)?, catalog).map_err(|e| e.in_file(path))
}

pub fn read_predictions<R: Read>(reader: R, catalog: &ClassCatalog) -> Result<ProbabilityMatrix> {
    let k = catalog.k();
    let mut records = csv_reader(reader).into_records();
    let header = records
        .next()
        .ok_or_else(|| Error::MalformedFile {
            line: 1,
            reason: "missing header".into(),
        })?
        .map_err(csv_error)?;
    let expected: Vec<&str> = std::iter::once("id")
        .chain(catalog.names().iter().map(String::as_str))
        .collect();
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::MalformedFile {
            line: record_line(&header),
            reason: format!(
                "header must be `{}`, found `{}`",
                expected.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut ids = Vec::new();
    let mut data = Vec::new();
    let mut seen = HashSet::new();
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record_line(&record);
        if record.len() != k + 1 {
            return Err(Error::MalformedFile {
                line,
                reason: format!("expected {} columns, found {}", k + 1, record.len()),
            });
        }
        let id = sample_id(&record[0], line)?;
        let mut row = Vec::with_capacity(k);
        for cell in record.iter().skip(1) {
            let value: f64 = cell.parse().map_err(|_| Error::MalformedFile {
                line,
                reason: format!("{cell:?} is not a number"),
            })?;
            row.push(value);
        }
        normalize_row(&mut row, k, DOMAIN_SLACK).map_err(|fault| match fault {
            RowFault::Domain(value) => Error::DomainViolation {
                line,
                row_id: id.to_string(),
                value,
            },
            RowFault::Sum(sum) => Error::RowSumViolation {
                line,
                row_id: id.to_string(),
                sum,
            },
            RowFault::Width(w) => Error::MalformedFile {
                line,
                reason: format!("expected {k} probabilities, found {w}"),
            },
        })?;
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId {
                line,
                id: id.to_string(),
            });
        }
        ids.push(id);
        data.extend(row);
    }
    if ids.is_empty() {
        return Err(Error::MalformedFile {
            line: 1,
            reason: "no sample rows".into(),
        });
    }
    Ok(ProbabilityMatrix::from_parts_unchecked(ids, data, catalog.clone()))
}

/// Formats `x` with 9 significant digits in plain decimal notation,
/// dropping trailing zeros.
pub fn format_probability(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    let sci = format!("{:.8e}", x.abs());
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format");
    let exponent: i32 = exponent.parse().expect("exponent");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let mut out = String::new();
    if x < 0.0 {
        out.push('-');
    }
    if exponent < 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exponent - 1) as usize));
        out.push_str(&digits);
    } else {
        let int_len = exponent as usize + 1;
        if int_len >= digits.len() {
            out.push_str(&digits);
            out.extend(std::iter::repeat_n('0', int_len - digits.len()));
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    }
    if out.contains('.') {
        let trimmed = out.trim_end_matches('0').trim_end_matches('.').len();
        out.truncate(trimmed);
    }
    out
}

pub fn write_predictions<W: Write>(matrix: &ProbabilityMatrix, mut writer: W) -> std::io::Result<()> {
    write!(writer, "id")?;
    for name in matrix.catalog().names() {
        write!(writer, ",{name}")?;
    }
    writeln!(writer)?;
    for (id, row) in matrix.ids().iter().zip(matrix.rows()) {
        write!(writer, "{id}")?;
        for &v in row {
            write!(writer, ",{}", format_probability(v))?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

pub fn load_labels(path: impl AsRef<Path>, catalog: &ClassCatalog) -> Result<LabelVector> {
    let path = path.as_ref();
    read_labels(open(path)?, catalog).map_err(|e| e.in_file(path))
}

pub fn read_labels<R: Read>(reader: R, catalog: &ClassCatalog) -> Result<LabelVector> {
    let mut records = csv_reader(reader).into_records();
    let header = records
        .next()
        .ok_or_else(|| Error::MalformedFile {
            line: 1,
            reason: "missing header".into(),
        })?
        .map_err(csv_error)?;
    if header.iter().ne(["id", "label"]) {
        return Err(Error::MalformedFile {
            line: record_line(&header),
            reason: "header must be `id,label`".into(),
        });
    }
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut seen = HashSet::new();
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record_line(&record);
        if record.len() != 2 {
            return Err(Error::MalformedFile {
                line,
                reason: format!("expected 2 columns, found {}", record.len()),
            });
        }
        let id = sample_id(&record[0], line)?;
        let label = catalog
            .resolve(&record[1])
            .ok_or_else(|| Error::UnknownClassName {
                line,
                name: record[1].to_owned(),
            })?;
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId {
                line,
                id: id.to_string(),
            });
        }
        ids.push(id);
        labels.push(label);
    }
    if ids.is_empty() {
        return Err(Error::MalformedFile {
            line: 1,
            reason: "no label rows".into(),
        });
    }
    LabelVector::new(ids, labels, catalog)
}

/// Writes labels using class names.
pub fn write_labels<W: Write>(
    labels: &LabelVector,
    catalog: &ClassCatalog,
    mut writer: W,
) -> std::io::Result<()> {
    writeln!(writer, "id,label")?;
    for (id, label) in labels.iter() {
        writeln!(writer, "{id},{}", catalog.name(label))?;
    }
    Ok(())
}

/// A confusion matrix together with the `model=` name it was stored under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionFixture {
    pub model: String,
    pub matrix: ConfusionMatrix,
}

pub fn load_confusion_fixture(path: impl AsRef<Path>, catalog: &ClassCatalog) -> Result<ConfusionFixture> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_confusion_fixture(&text, catalog).map_err(|e| e.in_file(path))
}

pub fn parse_confusion_fixture(text: &str, catalog: &ClassCatalog) -> Result<ConfusionFixture> {
    let mut model = None;
    let mut rows = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index as u64 + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        if let Some((key, value)) = content.split_once('=') {
            if key.trim() == "model" && model.is_none() && rows.is_empty() {
                let value = value.trim();
                if value.is_empty() {
                    return Err(Error::MalformedFile {
                        line,
                        reason: "empty model name".into(),
                    });
                }
                model = Some(value.to_owned());
                continue;
            }
            return Err(Error::MalformedFile {
                line,
                reason: format!("unexpected metadata line {content:?}"),
            });
        }
        let row = content
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|token| match token.parse::<i64>() {
                Ok(v) if v < 0 => Err(Error::NegativeCount { line, value: v }),
                Ok(v) => Ok(v as u64),
                Err(_) => Err(Error::NonInteger {
                    line,
                    token: token.to_owned(),
                }),
            })
            .collect::<Result<Vec<u64>>>()?;
        rows.push(row);
    }
    let model = model.ok_or_else(|| Error::MalformedFile {
        line: 1,
        reason: "missing `model=` line".into(),
    })?;
    let matrix = ConfusionMatrix::from_rows(rows, catalog.clone())?;
    Ok(ConfusionFixture { model, matrix })
}

pub fn write_confusion_fixture<W: Write>(fixture: &ConfusionFixture, mut writer: W) -> std::io::Result<()> {
    writeln!(writer, "model={}", fixture.model)?;
    for row in fixture.matrix.to_rows() {
        let cells: Vec<String> = row.iter().map(u64::to_string).collect();
        writeln!(writer, "{}", cells.join(" "))?;
    }
    Ok(())
}

/// Loads every `*.txt` fixture in `dir`, sorted by file name.
pub fn load_fixture_dir(
    dir: impl AsRef<Path>,
    catalog: &ClassCatalog,
    mode: Parallelism,
) -> Result<Vec<ConfusionFixture>> {
    let dir = dir.as_ref();
    let io_err = |source| Error::Io {
        path: dir.to_owned(),
        source,
    };
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "txt") {
            paths.push(path);
        }
    }
    paths.sort();
    exec::try_map_ordered(&paths, mode, |p| load_confusion_fixture(p, catalog))
}

/// Predictions from several models over one aligned sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPredictionSet {
    entries: BTreeMap<String, ProbabilityMatrix>,
    labels: LabelVector,
    catalog: ClassCatalog,
}

impl ModelPredictionSet {
    pub fn get(&self, model_id: &str) -> Result<&ProbabilityMatrix> {
        self.entries
            .get(model_id)
            .ok_or_else(|| Error::UnknownModelId(model_id.to_owned()))
    }

    /// Model ids in sorted order.
    pub fn model_ids(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn labels(&self) -> &LabelVector {
        &self.labels
    }

    pub fn catalog(&self) -> &ClassCatalog {
        &self.catalog
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn describe_difference(model: &str, ids: &[SampleId], reference: &HashSet<&SampleId>) -> Option<String> {
    let own: HashSet<&SampleId> = ids.iter().collect();
    let mut missing: Vec<&str> = reference
        .difference(&own)
        .map(|id| id.as_str())
        .collect();
    let mut extra: Vec<&str> = own
        .difference(reference)
        .map(|id| id.as_str())
        .collect();
    if missing.is_empty() && extra.is_empty() {
        return None;
    }
    missing.sort_unstable();
    extra.sort_unstable();
    let mut parts = Vec::new();
    if !missing.is_empty() {
        parts.push(format!("missing {}", missing.join(", ")));
    }
    if !extra.is_empty() {
        parts.push(format!("unexpected {}", extra.join(", ")));
    }
    Some(format!("model {model}: {}", parts.join("; ")))
}

/// Verifies that every model covers exactly the labelled ids and reorders
/// rows to the label file's order.
pub fn align(predictions: Vec<(String, ProbabilityMatrix)>, labels: LabelVector) -> Result<ModelPredictionSet> {
    let catalog = predictions
        .first()
        .map(|(_, m)| m.catalog().clone())
        .ok_or(Error::EmptyManifest)?;
    let reference: HashSet<&SampleId> = labels.ids().iter().collect();
    let mut problems = Vec::new();
    for (model, matrix) in &predictions {
        validate_model_id(model)?;
        if matrix.catalog() != &catalog {
            return Err(Error::CatalogMismatch);
        }
        if let Some(problem) = describe_difference(model, matrix.ids(), &reference) {
            problems.push(problem);
        }
    }
    if !problems.is_empty() {
        return Err(Error::IdMismatch(problems.join(" | ")));
    }

    let mut entries = BTreeMap::new();
    for (model, matrix) in predictions {
        let matrix = if matrix.ids() == labels.ids() {
            matrix
        } else {
            matrix.reordered(labels.ids())?
        };
        if entries.insert(model.clone(), matrix).is_some() {
            return Err(Error::DuplicateModelId(model));
        }
    }
    Ok(ModelPredictionSet {
        entries,
        labels,
        catalog,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    /// Model ids and prediction paths in file order.
    pub models: Vec<(String, PathBuf)>,
    pub labels: Option<PathBuf>,
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_manifest(&text, base).map_err(|e| e.in_file(path))
}

/// Parses manifest text; relative paths are resolved against `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Manifest> {
    let mut models = Vec::new();
    let mut labels = None;
    let mut seen = HashMap::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index as u64 + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::MalformedFile {
            line,
            reason: format!("expected `model-id=path`, found {content:?}"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(Error::MalformedFile {
                line,
                reason: format!("empty path for {key:?}"),
            });
        }
        let resolved = base.join(value);
        if key == LABELS_KEY {
            if labels.replace(resolved).is_some() {
                return Err(Error::MalformedFile {
                    line,
                    reason: "labels listed twice".into(),
                });
            }
            continue;
        }
        validate_model_id(key).map_err(|e| Error::MalformedFile {
            line,
            reason: e.to_string(),
        })?;
        if let Some(first) = seen.insert(key.to_owned(), line) {
            return Err(Error::MalformedFile {
                line,
                reason: format!("model {key:?} already listed on line {first}"),
            });
        }
        models.push((key.to_owned(), resolved));
    }
    Ok(Manifest { models, labels })
}

/// Loads and aligns everything a manifest lists.
pub fn load_prediction_set(
    manifest: &Manifest,
    catalog: &ClassCatalog,
    mode: Parallelism,
) -> Result<ModelPredictionSet> {
    if manifest.models.is_empty() {
        return Err(Error::EmptyManifest);
    }
    let labels_path = manifest.labels.as_ref().ok_or_else(|| Error::MalformedFile {
        line: 0,
        reason: "manifest has no `labels=` entry".into(),
    })?;
    let labels = load_labels(labels_path, catalog)?;
    let predictions = exec::try_map_ordered(&manifest.models, mode, |(id, path)| {
        load_predictions(path, catalog).map(|m| (id.clone(), m))
    })?;
    align(predictions, labels)
}
