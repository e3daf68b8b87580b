//! Experiment harness for the simulated Krylov-subspace linear solver:
//! configuration, the benchmark sweeps against the Fourier baseline, the
//! finite-difference study, cost formulas and CSV/JSON output.

pub mod analysis;
pub mod complexity;
pub mod config;
pub mod records;
pub mod runs;

use std::path::Path;

use thiserror::Error;

pub use config::{ExperimentConfig, SourceKind};
pub use records::{ExperimentRecord, Method, OverlapRecord};
pub use runs::{run_compare, run_fourier, run_overlap_study, run_qkls, Instance, RunMetadata, RunOutput};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qkls_core::QklsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

/// Writes `<path>` as CSV and `<path>.json` with the run metadata.
pub fn write_run(output: &RunOutput, path: &Path) -> Result<()> {
    records::write_csv(&output.records, std::fs::File::create(path)?)?;
    let meta_path = path.with_extension("json");
    std::fs::write(meta_path, serde_json::to_string_pretty(&output.metadata)?)?;
    Ok(())
}
