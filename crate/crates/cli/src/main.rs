use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ensavg_cli::commands::{self, SweepArgs};
use ensavg_cli::report::{Format, ReportDocument};
use ensavg_cli::{CliError, CliResult};
use ensavg_core::{F1Mode, Metric, Parallelism};

#[derive(Parser)]
#[command(name = "ensavg", version, about = "Evaluate averaged classifier ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output format: text, csv or json.
    #[arg(long, default_value = "text")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run everything on the calling thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn parallelism(&self) -> Parallelism {
        if self.sequential {
            Parallelism::Sequential
        } else {
            Parallelism::Parallel
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load and align every file in a manifest, reporting problems per file.
    Validate {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Evaluate one averaged ensemble end to end.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        /// Comma-separated model ids; defaults to every model in the manifest.
        #[arg(long, value_delimiter = ',')]
        members: Vec<String>,
        #[arg(long, default_value = "definition")]
        f1_mode: F1Mode,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate every ensemble in a size range and rank them.
    Sweep {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        min_size: Option<usize>,
        #[arg(long)]
        max_size: Option<usize>,
        #[arg(long, default_value = "weighted-accuracy")]
        metric: Metric,
        #[arg(long, default_value = "definition")]
        f1_mode: F1Mode,
        /// Fixed RFC 3339 timestamp for reproducible output.
        #[arg(long)]
        pin_timestamp: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Compute all metrics for a directory of confusion-matrix fixtures.
    FromConfusion {
        fixture_dir: PathBuf,
        #[arg(long, default_value = "weighted-accuracy")]
        metric: Metric,
        #[arg(long, default_value = "paper-replication")]
        f1_mode: F1Mode,
        #[arg(long)]
        pin_timestamp: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the best ensemble of a json report against baseline accuracies.
    Compare {
        #[arg(long)]
        baselines: PathBuf,
        /// A json report written by `sweep` or `from-confusion`.
        #[arg(long)]
        sweep: Option<PathBuf>,
        /// Also write an SVG bar chart here.
        #[arg(long)]
        chart: Option<PathBuf>,
        #[arg(long, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write prediction and label files that realize a confusion fixture.
    Synth {
        fixture: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = ensavg_core::synth::DEFAULT_SHARPNESS)]
        sharpness: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Validate { manifest } => {
            let outcome = commands::validate(&manifest);
            for line in &outcome.lines {
                if line.starts_with("error") {
                    eprintln!("{line}");
                } else {
                    println!("{line}");
                }
            }
            if !outcome.ok() {
                return Err(CliError::Validation(outcome.errors));
            }
        }
        Command::Eval {
            manifest,
            members,
            f1_mode,
            common,
        } => {
            let doc = commands::eval(&manifest, &members, f1_mode, common.parallelism())?;
            emit(&doc.render(common.format), common.out.as_deref())?;
        }
        Command::Sweep {
            manifest,
            min_size,
            max_size,
            metric,
            f1_mode,
            pin_timestamp,
            common,
        } => {
            let generated_at = commands::timestamp(pin_timestamp.as_deref())?;
            let args = SweepArgs {
                min_size,
                max_size,
                metric,
                f1_mode,
                generated_at: &generated_at,
                mode: common.parallelism(),
            };
            let (catalog, result) = commands::sweep(&manifest, &args)?;
            let doc = ReportDocument::from_sweep(&catalog, &result);
            emit(&doc.render(common.format), common.out.as_deref())?;
        }
        Command::FromConfusion {
            fixture_dir,
            metric,
            f1_mode,
            pin_timestamp,
            common,
        } => {
            let generated_at = commands::timestamp(pin_timestamp.as_deref())?;
            let (catalog, result) = commands::from_confusion(
                &fixture_dir,
                f1_mode,
                metric,
                &generated_at,
                common.parallelism(),
            )?;
            let doc = ReportDocument::from_sweep(&catalog, &result);
            emit(&doc.render(common.format), common.out.as_deref())?;
        }
        Command::Compare {
            baselines,
            sweep,
            chart,
            format,
            out,
        } => {
            let report = sweep.as_deref().map(commands::read_report).transpose()?;
            let comparison = commands::compare(report.as_ref(), &baselines)?;
            if let Some(path) = chart {
                std::fs::write(&path, comparison.to_svg())
                    .map_err(|source| CliError::Io { path, source })?;
            }
            emit(&comparison.render(format), out.as_deref())?;
        }
        Command::Synth {
            fixture,
            seed,
            sharpness,
            out,
        } => {
            let outcome = commands::synth(&fixture, seed, sharpness, &out)?;
            print!("{}", outcome.summary());
            if !outcome.round_trip_ok {
                return Err(CliError::Validation(1));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
