//! Report generation and subcommand implementations for the `ensavg` tool.

pub mod commands;
pub mod compare;
pub mod error;
pub mod report;
pub mod rounding;

pub use error::{CliError, CliResult};
pub use report::{Format, ReportDocument, SweepResult};
