//! Config-driven experiments: seeded runs of each policy, aggregated regret
//! curves and bound curves, written as CSV or JSON.

mod config;
mod output;
mod run;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{
    ArmSection, Experiment, ExperimentConfig, InstanceSection, OutputFormat, OutputSection, PmfSpec,
    SeedRange, SeedSpec,
};
pub use output::{emit, read_json, sidecar_path, write_bounds_csv, write_json, write_summary_csv, write_traces_csv, SCHEMA};
pub use run::{
    aggregate, bound_curves, run_experiment, run_single, BoundCurve, BoundKind, BoundPoint,
    ExperimentOutput, RegretSummary, RegretTrace, SummaryPoint, TracePoint,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("aggregation error: {0}")]
    Aggregation(String),

    #[error("no traces to emit")]
    Empty,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Core(#[from] crate::Error),
}
