use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ensavg_core::ingest::{load_confusion_fixture, write_labels, write_predictions};
use ensavg_core::synth::generate_from_confusion;
use ensavg_core::{default_catalog, LabelVector, ProbabilityMatrix, SampleId};
use tempfile::TempDir;

const PIN: &str = "2026-01-01T00:00:00Z";

fn ensavg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ensavg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn write_matrix(path: &Path, m: &ProbabilityMatrix) {
    let mut buf = Vec::new();
    write_predictions(m, &mut buf).unwrap();
    fs::write(path, buf).unwrap();
}

fn write_truth(path: &Path, l: &LabelVector) {
    let mut buf = Vec::new();
    write_labels(l, &default_catalog(), &mut buf).unwrap();
    fs::write(path, buf).unwrap();
}

/// Writes one prediction file per model id, each synthesized from the given
/// fixture with a different sharpness, sharing one label file.
fn synth_manifest(dir: &Path, fixture_file: &str, models: &[&str]) -> PathBuf {
    let cm = load_confusion_fixture(fixture(&format!("confusion/{fixture_file}")), &default_catalog()).unwrap().matrix;
    let mut manifest = String::new();
    for (i, id) in models.iter().enumerate() {
        let data = generate_from_confusion(&cm, 1, 0.9 - 0.1 * i as f64).unwrap();
        write_matrix(&dir.join(format!("{id}.csv")), &data.predictions);
        if i == 0 {
            write_truth(&dir.join("labels.csv"), &data.labels);
        }
        manifest.push_str(&format!("{id}={id}.csv\n"));
    }
    manifest.push_str("labels=labels.csv\n");
    let path = dir.join("manifest.txt");
    fs::write(&path, manifest).unwrap();
    path
}

const FIVE: [&str; 5] = ["effnet", "incep", "res50", "res101", "res152"];

#[test]
fn validate_accepts_five_models() {
    let dir = TempDir::new().unwrap();
    let m = synth_manifest(dir.path(), "06_effnet_res152.txt", &FIVE);
    let out = ensavg(&["validate", "--manifest", m.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("5 models aligned over 640 samples"));
}

#[test]
fn validate_reports_row_sum_violation() {
    let dir = TempDir::new().unwrap();
    let m = synth_manifest(dir.path(), "06_effnet_res152.txt", &["effnet", "res152"]);
    let bad = dir.path().join("res152.csv");
    let text = fs::read_to_string(&bad).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    let id = lines[3].split(',').next().unwrap().to_owned();
    lines[3] = format!("{id},0.5,0.5,0.5,0.1");
    fs::write(&bad, lines.join("\n") + "\n").unwrap();

    let out = ensavg(&["validate", "--manifest", m.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("res152.csv"), "{err}");
    assert!(err.contains(&id), "{err}");
    assert!(err.contains("sums to 1.6"), "{err}");
}

#[test]
fn validate_rejects_empty_manifest() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("manifest.txt");
    fs::write(&m, "# nothing here\n").unwrap();
    let out = ensavg(&["validate", "--manifest", m.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("manifest lists no models"), "{}", stderr(&out));
}

#[test]
fn eval_identical_members_match_the_member() {
    let dir = TempDir::new().unwrap();
    let cm = load_confusion_fixture(fixture("confusion/06_effnet_res152.txt"), &default_catalog()).unwrap().matrix;
    let data = generate_from_confusion(&cm, 1, 0.9).unwrap();
    write_matrix(&dir.path().join("p.csv"), &data.predictions);
    write_truth(&dir.path().join("labels.csv"), &data.labels);
    let m = dir.path().join("manifest.txt");
    fs::write(&m, "effnet=p.csv\nres152=p.csv\nincep=p.csv\nlabels=labels.csv\n").unwrap();

    let out = ensavg(&[
        "eval", "--manifest", m.to_str().unwrap(), "--members", "effnet,res152", "--format", "csv",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = stdout(&out);
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("1,effnet+res152,2,definition,0.9891,"), "{row}");

    let out = ensavg(&["eval", "--manifest", m.to_str().unwrap(), "--members", "effnet,vgg"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("vgg"));
}

#[test]
fn eval_perfect_model_scores_one_everywhere() {
    let dir = TempDir::new().unwrap();
    let catalog = default_catalog();
    let ids: Vec<SampleId> = (0..12).map(|i| SampleId::new(format!("x{i}")).unwrap()).collect();
    let labels: Vec<usize> = (0..12).map(|i| i % 4).collect();
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|&c| (0..4).map(|j| if j == c { 1.0 } else { 0.0 }).collect())
        .collect();
    write_matrix(
        &dir.path().join("p.csv"),
        &ProbabilityMatrix::new(ids.clone(), rows, catalog.clone()).unwrap(),
    );
    write_truth(&dir.path().join("labels.csv"), &LabelVector::new(ids, labels, &catalog).unwrap());
    let m = dir.path().join("manifest.txt");
    fs::write(&m, "solo=p.csv\nlabels=labels.csv\n").unwrap();

    let out = ensavg(&["eval", "--manifest", m.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let metrics = doc["ensembles"][0]["metrics"].as_object().unwrap();
    assert_eq!(metrics.len(), 10);
    for (key, v) in metrics {
        assert_eq!(v.as_f64(), Some(1.0), "{key}");
    }
}

#[test]
fn eval_json_follows_the_documented_schema() {
    let dir = TempDir::new().unwrap();
    let m = synth_manifest(dir.path(), "03_incep_res152.txt", &["a", "b"]);
    let out = ensavg(&["eval", "--manifest", m.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["catalog"].as_array().unwrap().len(), 4);
    let e = &doc["ensembles"][0];
    assert_eq!(e["name"], "a+b");
    assert_eq!(e["members"], serde_json::json!(["a", "b"]));
    assert_eq!(e["f1_mode"], "definition");
    assert_eq!(e["confusion"].as_array().unwrap().len(), 4);
    assert_eq!(e["per_class"].as_array().unwrap().len(), 4);
    assert_eq!(e["metrics"]["weighted_accuracy"], 0.9859);

    let typed: ensavg_cli::ReportDocument = serde_json::from_slice(&out.stdout).unwrap();
    let again = typed.render(ensavg_cli::Format::Json);
    assert_eq!(again, stdout(&out));
}

#[test]
fn sweep_counts_subsets() {
    let dir = TempDir::new().unwrap();
    let m = synth_manifest(dir.path(), "06_effnet_res152.txt", &FIVE);
    let out = ensavg(&[
        "sweep", "--manifest", m.to_str().unwrap(), "--min-size", "2", "--max-size", "3",
        "--format", "csv", "--pin-timestamp", PIN,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 1 + 20);

    let out = ensavg(&[
        "sweep", "--manifest", m.to_str().unwrap(), "--min-size", "2", "--max-size", "6",
    ]);
    assert!(!out.status.success());

    let one = TempDir::new().unwrap();
    let m = synth_manifest(one.path(), "06_effnet_res152.txt", &["only"]);
    let out = ensavg(&[
        "sweep", "--manifest", m.to_str().unwrap(), "--min-size", "1", "--max-size", "1",
        "--format", "csv",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn sweep_text_names_the_best_subset() {
    let dir = TempDir::new().unwrap();
    let m = synth_manifest(dir.path(), "06_effnet_res152.txt", &["x", "y"]);
    let out = ensavg(&["sweep", "--manifest", m.to_str().unwrap(), "--pin-timestamp", PIN]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("generated at 2026-01-01T00:00:00Z"));
    assert!(text.lines().any(|l| l.starts_with("best weighted_accuracy")), "{text}");
}

#[test]
fn from_confusion_reports_fixture_rows() {
    let out = ensavg(&[
        "from-confusion",
        fixture("confusion").to_str().unwrap(),
        "--format",
        "csv",
        "--pin-timestamp",
        PIN,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 16);
    let row = text.lines().find(|l| l.contains(",incep+res152,")).unwrap();
    assert!(row.contains(",paper-replication,0.9859,"), "{row}");

    let empty = TempDir::new().unwrap();
    let out = ensavg(&["from-confusion", empty.path().to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn compare_places_this_work_first() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("r.json");
    let chart = dir.path().join("c.svg");
    let out = ensavg(&[
        "from-confusion",
        fixture("confusion").to_str().unwrap(),
        "--format",
        "json",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let baselines = fixture("baselines.csv");
    let out = ensavg(&[
        "compare", "--baselines", baselines.to_str().unwrap(), "--sweep", report.to_str().unwrap(),
        "--chart", chart.to_str().unwrap(), "--format", "csv",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let first = text.lines().nth(1).unwrap();
    assert!(first.starts_with("This work,") && first.ends_with(",0.9891"), "{first}");
    assert_eq!(text.lines().count(), 6);
    assert!(fs::read_to_string(&chart).unwrap().starts_with("<svg"));

    let out = ensavg(&["compare", "--baselines", baselines.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 5);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "author,model,accuracy\nX et al.,Net,1.02\n").unwrap();
    let out = ensavg(&["compare", "--baselines", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("malformed baselines"), "{}", stderr(&out));
}

#[test]
fn synth_round_trips_and_is_reproducible() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let fx = fixture("confusion/06_effnet_res152.txt");
    for dir in [&a, &b] {
        let out = ensavg(&["synth", fx.to_str().unwrap(), "--seed", "1", "--out", dir.path().to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(stdout(&out).contains("round-trip OK"));
    }
    for name in ["predictions.csv", "labels.csv", "manifest.txt"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let out = ensavg(&["validate", "--manifest", a.path().join("manifest.txt").to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));

    let out = ensavg(&[
        "synth", fx.to_str().unwrap(), "--sharpness", "0.01", "--out", a.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("sharpness 0.01 is invalid"));
}

#[test]
fn bad_flags_fail() {
    let out = ensavg(&["from-confusion", fixture("confusion").to_str().unwrap(), "--f1-mode", "mean"]);
    assert!(!out.status.success());
    let out = ensavg(&[
        "from-confusion", fixture("confusion").to_str().unwrap(), "--pin-timestamp", "yesterday",
    ]);
    assert!(!out.status.success());
}
