//! Ranked sweep results and the text / csv / json report documents.
//!
//! Every format is rendered from one [`ReportDocument`] whose metric values are
//! already rounded, so the three emissions always agree digit for digit.

use std::fmt::Write as _;
use std::str::FromStr;

use ensavg_core::sweep::Evaluation;
use ensavg_core::{ClassCatalog, F1Mode, Metric};
use serde::{Deserialize, Serialize};

use crate::rounding::{display, display_value};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (expected text, csv or json)")),
        }
    }
}

/// Evaluations sorted by a ranking metric, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    rows: Vec<Evaluation>,
    ranking_metric: Metric,
    generated_at: String,
}

impl SweepResult {
    /// Sorts descending by `metric`; equal values are ordered by display name.
    pub fn ranked(mut rows: Vec<Evaluation>, metric: Metric, generated_at: String) -> Self {
        rows.sort_by(|a, b| {
            b.report
                .get(metric)
                .total_cmp(&a.report.get(metric))
                .then_with(|| a.spec.display_name().cmp(b.spec.display_name()))
        });
        Self {
            rows,
            ranking_metric: metric,
            generated_at,
        }
    }

    pub fn rows(&self) -> &[Evaluation] {
        &self.rows
    }

    pub fn ranking_metric(&self) -> Metric {
        self.ranking_metric
    }

    pub fn generated_at(&self) -> &str {
        &self.generated_at
    }

    /// All rows whose displayed ranking value equals the top row's.
    pub fn best(&self) -> Vec<&Evaluation> {
        let Some(top) = self.rows.first() else {
            return Vec::new();
        };
        let top_value = display_value(top.report.get(self.ranking_metric));
        self.rows
            .iter()
            .take_while(|e| display_value(e.report.get(self.ranking_metric)) == top_value)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValues {
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
}

impl MetricValues {
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

    fn rounded(report: &ensavg_core::MetricsReport) -> Self {
        let v = |m| display_value(report.get(m));
        Self {
            weighted_accuracy: v(Metric::WeightedAccuracy),
            weighted_precision: v(Metric::WeightedPrecision),
            macro_precision: v(Metric::MacroPrecision),
            micro_precision: v(Metric::MicroPrecision),
            weighted_recall: v(Metric::WeightedRecall),
            macro_recall: v(Metric::MacroRecall),
            micro_recall: v(Metric::MicroRecall),
            weighted_f1: v(Metric::WeightedF1),
            macro_f1: v(Metric::MacroF1),
            micro_f1: v(Metric::MicroF1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub class: String,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleEntry {
    pub name: String,
    pub members: Vec<String>,
    /// Rows = actual class, columns = predicted class.
    pub confusion: Vec<Vec<u64>>,
    pub per_class: Vec<ClassEntry>,
    pub metrics: MetricValues,
    pub f1_mode: F1Mode,
}

impl EnsembleEntry {
    fn from_evaluation(e: &Evaluation) -> Self {
        let catalog = e.confusion.catalog();
        let per_class = e
            .report
            .per_class
            .classes
            .iter()
            .enumerate()
            .map(|(c, s)| ClassEntry {
                class: catalog.name(c).to_owned(),
                tp: s.tp,
                fp: s.fp,
                fn_: s.fn_,
                support: s.support,
                precision: display_value(s.precision),
                recall: display_value(s.recall),
                f1: display_value(s.f1),
                precision_undefined: s.precision_undefined,
                recall_undefined: s.recall_undefined,
            })
            .collect();
        Self {
            name: e.spec.display_name().to_owned(),
            members: e.spec.members().to_vec(),
            confusion: e.confusion.to_rows(),
            per_class,
            metrics: MetricValues::rounded(&e.report),
            f1_mode: e.report.f1_mode,
        }
    }
}

/// The documented json report schema; also the source for text and csv output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub catalog: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking_metric: Option<Metric>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best: Option<Vec<String>>,
    pub ensembles: Vec<EnsembleEntry>,
}

impl ReportDocument {
    pub fn from_evaluations(catalog: &ClassCatalog, evaluations: &[Evaluation]) -> Self {
        Self {
            catalog: catalog.names().to_vec(),
            ranking_metric: None,
            generated_at: None,
            best: None,
            ensembles: evaluations.iter().map(EnsembleEntry::from_evaluation).collect(),
        }
    }

    pub fn from_sweep(catalog: &ClassCatalog, sweep: &SweepResult) -> Self {
        Self {
            ranking_metric: Some(sweep.ranking_metric()),
            generated_at: Some(sweep.generated_at().to_owned()),
            best: Some(
                sweep
                    .best()
                    .iter()
                    .map(|e| e.spec.display_name().to_owned())
                    .collect(),
            ),
            ..Self::from_evaluations(catalog, sweep.rows())
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_text(),
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }

    fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["rank", "name", "size", "f1_mode"];
        header.extend(Metric::ALL.iter().map(|m| m.key()));
        w.write_record(&header).expect("in-memory write");
        for (i, e) in self.ensembles.iter().enumerate() {
            let mut record = vec![
                (i + 1).to_string(),
                e.name.clone(),
                e.members.len().to_string(),
                e.f1_mode.to_string(),
            ];
            record.extend(Metric::ALL.iter().map(|&m| display(e.metrics.get(m))));
            w.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    fn to_text(&self) -> String {
        const SHORT: [&str; 10] = [
            "wAcc", "wPrec", "mPrec", "uPrec", "wRec", "mRec", "uRec", "wF1", "mF1", "uF1",
        ];
        let mut out = String::new();
        if let Some(metric) = self.ranking_metric {
            let mode = self.ensembles.first().map_or("-", |e| e.f1_mode.as_str());
            let _ = writeln!(out, "ranked by {metric} (f1 mode: {mode})");
        }
        if let Some(at) = &self.generated_at {
            let _ = writeln!(out, "generated at {at}");
        }
        let width = self
            .ensembles
            .iter()
            .map(|e| e.name.len())
            .max()
            .unwrap_or(0)
            .max("ensemble".len());
        let _ = write!(out, "{:>4}  {:<width$}", "rank", "ensemble");
        for h in SHORT {
            let _ = write!(out, "  {h:>6}");
        }
        out.push('\n');
        for (i, e) in self.ensembles.iter().enumerate() {
            let _ = write!(out, "{:>4}  {:<width$}", i + 1, e.name);
            for m in Metric::ALL {
                let _ = write!(out, "  {:>6}", display(e.metrics.get(m)));
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "(w = weighted, m = macro, u = micro; values rounded half-up to 4 places)"
        );

        if let (Some(metric), Some(best), Some(top)) =
            (self.ranking_metric, &self.best, self.ensembles.first())
        {
            let _ = writeln!(
                out,
                "best {metric} {}: {}",
                display(top.metrics.get(metric)),
                best.join(", ")
            );
        }
        if self.ranking_metric.is_none() {
            for e in &self.ensembles {
                self.write_details(&mut out, e);
            }
        }
        out
    }

    fn write_details(&self, out: &mut String, e: &EnsembleEntry) {
        let width = self.catalog.iter().map(String::len).max().unwrap_or(0).max(5);
        let _ = writeln!(out, "\n{} (f1 mode: {})", e.name, e.f1_mode);
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>6}  {:>6}  {:>7}  {:>9}  {:>6}  {:>6}",
            "class", "tp", "fp", "fn", "support", "precision", "recall", "f1"
        );
        for c in &e.per_class {
            let flag = if c.precision_undefined || c.recall_undefined {
                "  (zero division)"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "{:<width$}  {:>6}  {:>6}  {:>6}  {:>7}  {:>9}  {:>6}  {:>6}{flag}",
                c.class,
                c.tp,
                c.fp,
                c.fn_,
                c.support,
                display(c.precision),
                display(c.recall),
                display(c.f1)
            );
        }
        let _ = writeln!(out, "confusion (rows = actual, columns = predicted):");
        for (name, row) in self.catalog.iter().zip(&e.confusion) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>6}")).collect();
            let _ = writeln!(out, "{name:<width$}  {}", cells.join(""));
        }
    }
}
