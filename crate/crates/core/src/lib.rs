//! Ensemble averaging of classifier probability outputs and the weighted,
//! macro and micro multi-class metric family.
//!
//! The `parallel` feature (on by default) spreads subset sweeps and row
//! averaging over a rayon pool. Results are identical with it switched off.

pub mod ensemble;
pub mod error;
pub mod exec;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod sweep;
pub mod synth;

pub use error::{Error, Result};
pub use exec::Parallelism;
pub use model::{
    default_catalog, ClassCatalog, ClassStats, ConfusionMatrix, EnsembleSpec, F1Mode, LabelVector,
    Metric, MetricsReport, PerClassStats, ProbabilityMatrix, SampleId,
};
