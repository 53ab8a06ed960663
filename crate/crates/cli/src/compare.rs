//! Comparison of the best ensemble against published baseline accuracies,
//! with an optional SVG bar chart.

use std::fmt::Write as _;
use std::path::Path;

use ensavg_core::Metric;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::report::{Format, ReportDocument};
use crate::rounding::{display, display_value};

pub const THIS_WORK: &str = "This work";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub author_label: String,
    pub model_label: String,
    pub accuracy: f64,
}

/// Reads `author,model,accuracy` rows. A leading header row with those names is skipped.
pub fn load_baselines(path: &Path) -> CliResult<Vec<BaselineEntry>> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_baselines(file, path)
}

pub fn parse_baselines<R: std::io::Read>(reader: R, path: &Path) -> CliResult<Vec<BaselineEntry>> {
    let malformed = |line: u64, reason: String| CliError::MalformedBaselines {
        path: path.to_owned(),
        line,
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut entries = Vec::new();
    for (index, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| malformed(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if index == 0 && record.iter().eq(["author", "model", "accuracy"]) {
            continue;
        }
        if record.len() != 3 {
            return Err(malformed(line, format!("expected 3 columns, found {}", record.len())));
        }
        let accuracy: f64 = record[2]
            .parse()
            .map_err(|_| malformed(line, format!("{:?} is not a number", &record[2])))?;
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(malformed(line, format!("accuracy {accuracy} outside [0, 1]")));
        }
        if record[0].is_empty() || record[1].is_empty() {
            return Err(malformed(line, "empty author or model".into()));
        }
        entries.push(BaselineEntry {
            author_label: record[0].to_owned(),
            model_label: record[1].to_owned(),
            accuracy,
        });
    }
    Ok(entries)
}

/// The entry for the report's best ensemble(s) by weighted accuracy.
pub fn best_entry(doc: &ReportDocument) -> Option<BaselineEntry> {
    let top = doc
        .ensembles
        .iter()
        .map(|e| e.metrics.get(Metric::WeightedAccuracy))
        .max_by(f64::total_cmp)?;
    let names: Vec<&str> = doc
        .ensembles
        .iter()
        .filter(|e| e.metrics.get(Metric::WeightedAccuracy) == top)
        .map(|e| e.name.as_str())
        .collect();
    Some(BaselineEntry {
        author_label: THIS_WORK.to_owned(),
        model_label: format!("Ensemble Averaging ({})", names.join(" / ")),
        accuracy: top,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub entries: Vec<BaselineEntry>,
}

impl Comparison {
    /// Merges baselines with the optional best row, sorted by accuracy descending.
    pub fn new(best: Option<BaselineEntry>, baselines: Vec<BaselineEntry>) -> Self {
        let mut entries = baselines;
        entries.extend(best);
        entries.sort_by(|a, b| {
            b.accuracy
                .total_cmp(&a.accuracy)
                .then_with(|| a.author_label.cmp(&b.author_label))
        });
        Self { entries }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let rounded = Comparison {
                    entries: self
                        .entries
                        .iter()
                        .map(|e| BaselineEntry {
                            accuracy: display_value(e.accuracy),
                            ..e.clone()
                        })
                        .collect(),
                };
                let mut s = serde_json::to_string_pretty(&rounded).expect("serializes");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["author", "model", "accuracy"]).expect("in-memory write");
                for e in &self.entries {
                    w.write_record([e.author_label.as_str(), &e.model_label, &display(e.accuracy)])
                        .expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
            }
            Format::Text => {
                let a = self.entries.iter().map(|e| e.author_label.len()).max().unwrap_or(0).max(6);
                let m = self.entries.iter().map(|e| e.model_label.len()).max().unwrap_or(0).max(5);
                let mut out = format!("{:<a$}  {:<m$}  accuracy\n", "author", "model");
                for e in &self.entries {
                    let _ = writeln!(out, "{:<a$}  {:<m$}  {}", e.author_label, e.model_label, display(e.accuracy));
                }
                out
            }
        }
    }

    /// A horizontal bar chart of accuracies as a standalone SVG document.
    pub fn to_svg(&self) -> String {
        const BAR_H: usize = 28;
        const GAP: usize = 12;
        const LABEL_W: usize = 320;
        const PLOT_W: f64 = 400.0;
        let height = 50 + self.entries.len() * (BAR_H + GAP) + 20;
        let width = LABEL_W + PLOT_W as usize + 90;
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="13">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(svg, r#"<text x="10" y="24" font-size="15" font-weight="bold">Accuracy comparison</text>"#);
        for (i, e) in self.entries.iter().enumerate() {
            let y = 40 + i * (BAR_H + GAP);
            let w = PLOT_W * e.accuracy.clamp(0.0, 1.0);
            let fill = if e.author_label == THIS_WORK { "#c0392b" } else { "#2e86c1" };
            let label = xml_escape(&format!("{} ({})", e.author_label, e.model_label));
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="end">{label}</text>"#,
                LABEL_W - 8,
                y + BAR_H / 2 + 5
            );
            let _ = writeln!(
                svg,
                r#"<rect x="{LABEL_W}" y="{y}" width="{w:.1}" height="{BAR_H}" fill="{fill}"/>"#
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{}">{}</text>"#,
                LABEL_W as f64 + w + 6.0,
                y + BAR_H / 2 + 5,
                display(e.accuracy)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
