//! Implementations behind each subcommand. They return documents rather than
//! printing, so tests can drive them directly.

use std::fs;
use std::path::{Path, PathBuf};

use ensavg_core::ensemble::{argmax_predict, enumerate_subsets, SubsetRange};
use ensavg_core::ingest::{
    self, load_confusion_fixture, load_fixture_dir, load_labels, load_manifest, load_predictions,
    write_labels, write_predictions,
};
use ensavg_core::metrics::{build_confusion, compute_report};
use ensavg_core::sweep::{self, Evaluation};
use ensavg_core::synth::generate_from_confusion;
use ensavg_core::{default_catalog, ClassCatalog, EnsembleSpec, Error, F1Mode, Metric, Parallelism};

use crate::compare::{best_entry, load_baselines, Comparison};
use crate::error::{CliError, CliResult};
use crate::report::{ReportDocument, SweepResult};

/// Returns `pin` after checking it parses as RFC 3339, or the current UTC time.
pub fn timestamp(pin: Option<&str>) -> CliResult<String> {
    match pin {
        Some(t) => chrono::DateTime::parse_from_rfc3339(t)
            .map(|_| t.to_owned())
            .map_err(|_| CliError::BadTimestamp(t.to_owned())),
        None => Ok(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidateOutcome {
    pub lines: Vec<String>,
    pub errors: usize,
}

impl ValidateOutcome {
    pub fn ok(&self) -> bool {
        self.errors == 0
    }
}

/// Loads every file in a manifest, collecting one diagnostic per failing file,
/// then checks alignment.
pub fn validate(manifest: &Path) -> ValidateOutcome {
    let mut lines = Vec::new();
    let mut errors = 0;
    let mut fail = |lines: &mut Vec<String>, msg: String| {
        errors += 1;
        lines.push(format!("error: {msg}"));
    };
    let catalog = default_catalog();
    let parsed = match load_manifest(manifest) {
        Ok(m) => m,
        Err(e) => {
            fail(&mut lines, e.to_string());
            return ValidateOutcome { lines, errors };
        }
    };
    if parsed.models.is_empty() {
        fail(&mut lines, format!("{}: {}", manifest.display(), Error::EmptyManifest));
        return ValidateOutcome { lines, errors };
    }

    let labels = match &parsed.labels {
        None => {
            fail(&mut lines, format!("{}: no `labels=` entry", manifest.display()));
            None
        }
        Some(path) => match load_labels(path, &catalog) {
            Ok(l) => {
                lines.push(format!("ok: {} ({} labels)", path.display(), l.len()));
                Some(l)
            }
            Err(e) => {
                fail(&mut lines, e.to_string());
                None
            }
        },
    };
    let mut predictions = Vec::new();
    for (id, path) in &parsed.models {
        match load_predictions(path, &catalog) {
            Ok(m) => {
                lines.push(format!("ok: {} (model {id}, {} rows)", path.display(), m.n()));
                predictions.push((id.clone(), m));
            }
            Err(e) => fail(&mut lines, e.to_string()),
        }
    }
    if let (Some(labels), true) = (labels, predictions.len() == parsed.models.len()) {
        match ingest::align(predictions, labels) {
            Ok(set) => lines.push(format!(
                "ok: {} models aligned over {} samples",
                set.len(),
                set.labels().len()
            )),
            Err(e) => fail(&mut lines, e.to_string()),
        }
    }
    ValidateOutcome { lines, errors }
}

fn load_set(manifest: &Path, mode: Parallelism) -> CliResult<ingest::ModelPredictionSet> {
    let parsed = load_manifest(manifest)?;
    Ok(ingest::load_prediction_set(&parsed, &default_catalog(), mode)?)
}

/// Evaluates one ensemble; an empty member list means every model in the manifest.
pub fn eval(
    manifest: &Path,
    members: &[String],
    f1_mode: F1Mode,
    mode: Parallelism,
) -> CliResult<ReportDocument> {
    let set = load_set(manifest, mode)?;
    let spec = if members.is_empty() {
        EnsembleSpec::new(set.model_ids())?
    } else {
        EnsembleSpec::new(members.iter().cloned())?
    };
    let evaluation = sweep::evaluate(&spec, &set, f1_mode, mode)?;
    Ok(ReportDocument::from_evaluations(set.catalog(), &[evaluation]))
}

pub struct SweepArgs<'a> {
    pub min_size: Option<usize>,
    pub max_size: Option<usize>,
    pub metric: Metric,
    pub f1_mode: F1Mode,
    pub generated_at: &'a str,
    pub mode: Parallelism,
}

pub fn sweep(manifest: &Path, args: &SweepArgs<'_>) -> CliResult<(ClassCatalog, SweepResult)> {
    let set = load_set(manifest, args.mode)?;
    let pool = set.model_ids();
    let range = SubsetRange::new(args.min_size.unwrap_or(1), args.max_size.unwrap_or(pool.len()))?;
    let specs = enumerate_subsets(&pool, range)?;
    let rows = sweep::sweep(&set, &specs, args.f1_mode, args.mode)?;
    Ok((
        set.catalog().clone(),
        SweepResult::ranked(rows, args.metric, args.generated_at.to_owned()),
    ))
}

/// Computes all metrics for every fixture in `dir` and ranks them.
pub fn from_confusion(
    dir: &Path,
    f1_mode: F1Mode,
    metric: Metric,
    generated_at: &str,
    mode: Parallelism,
) -> CliResult<(ClassCatalog, SweepResult)> {
    let catalog = default_catalog();
    let fixtures = load_fixture_dir(dir, &catalog, mode)?;
    if fixtures.is_empty() {
        return Err(CliError::EmptyFixtureDir(dir.to_owned()));
    }
    let rows = ensavg_core::exec::try_map_ordered(&fixtures, mode, |f| -> CliResult<Evaluation> {
        Ok(Evaluation {
            spec: EnsembleSpec::parse(&f.model)?,
            confusion: f.matrix.clone(),
            report: compute_report(&f.matrix, f1_mode)?,
        })
    })?;
    Ok((catalog, SweepResult::ranked(rows, metric, generated_at.to_owned())))
}

pub fn compare(sweep: Option<&ReportDocument>, baselines: &Path) -> CliResult<Comparison> {
    let entries = load_baselines(baselines)?;
    Ok(Comparison::new(sweep.and_then(best_entry), entries))
}

pub fn read_report(path: &Path) -> CliResult<ReportDocument> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthOutcome {
    pub predictions: PathBuf,
    pub labels: PathBuf,
    pub manifest: PathBuf,
    pub samples: usize,
    pub round_trip_ok: bool,
}

impl SynthOutcome {
    pub fn summary(&self) -> String {
        format!(
            "wrote {} samples\n  predictions: {}\n  labels: {}\n  manifest: {}\n{}\n",
            self.samples,
            self.predictions.display(),
            self.labels.display(),
            self.manifest.display(),
            if self.round_trip_ok {
                "round-trip OK"
            } else {
                "round-trip FAILED"
            }
        )
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Writes predictions, labels and a manifest realizing a fixture, then reloads
/// them from disk and checks the confusion matrix comes back unchanged.
pub fn synth(fixture: &Path, seed: u64, sharpness: f64, out_dir: &Path) -> CliResult<SynthOutcome> {
    let catalog = default_catalog();
    let fixture = load_confusion_fixture(fixture, &catalog)?;
    let data = generate_from_confusion(&fixture.matrix, seed, sharpness)?;
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.to_owned(),
        source,
    })?;

    let predictions = out_dir.join("predictions.csv");
    let labels = out_dir.join("labels.csv");
    let manifest = out_dir.join("manifest.txt");
    let mut buf = Vec::new();
    write_predictions(&data.predictions, &mut buf).expect("in-memory write");
    write_file(&predictions, &buf)?;
    buf.clear();
    write_labels(&data.labels, &catalog, &mut buf).expect("in-memory write");
    write_file(&labels, &buf)?;
    let model_id = fixture.model.replace('+', "-");
    write_file(
        &manifest,
        format!("{model_id}=predictions.csv\nlabels=labels.csv\n").as_bytes(),
    )?;

    let reloaded = load_predictions(&predictions, &catalog)?;
    let truth = load_labels(&labels, &catalog)?;
    let round_trip = build_confusion(&argmax_predict(&reloaded), &truth, &catalog)?;
    Ok(SynthOutcome {
        predictions,
        labels,
        manifest,
        samples: truth.len(),
        round_trip_ok: round_trip == fixture.matrix,
    })
}
