//! Monte-Carlo harness around `hbdris-core`: run configurations, the figure
//! scenarios, CSV/JSON/SVG outputs and the invariant self-test.

pub mod config;
pub mod experiment;
pub mod figures;
pub mod output;
pub mod plot;
pub mod selftest;

pub use config::{ArchEntry, Metric, RunConfig, Surface, Sweep, SweepVariable};
pub use experiment::{run_scenario, ExperimentResult, Metadata, Series};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] hbdris_core::Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
