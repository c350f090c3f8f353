//! Monte Carlo benchmark harness: configuration, execution, metrics, table
//! emission, CSV ingestion, and the oracle validation runner.

pub mod config;
pub mod ingest;
pub mod metrics;
pub mod runner;
pub mod tables;
pub mod validate;

pub use config::{
    default_estimators, horizon_to_n, BenchmarkConfig, EstimatorKind, EstimatorSpec,
    SimOverrides, OBS_PER_YEAR,
};
pub use ingest::{ingest_csv, render_levels_csv, IngestSpec, PriceKind, SECONDS_PER_YEAR};
pub use metrics::{iteration_histogram, metrics, McSummary};
pub use runner::{
    divergence_demo, evaluate_estimator, run_benchmark, CellResult, DivergencePoint,
    EstimateOutcome, PathRow, ResolvedEstimator,
};
pub use tables::{emit_tables, horizon_label, write_outputs, TableFormat};
pub use validate::{run_validation, ValidationConfig, ValidationSummary};

use crate::error::Result;

/// Run the benchmark and write the `tables/`, `raw/`, `iters/` output tree.
pub fn run_benchmark_to_dir(cfg: &BenchmarkConfig) -> Result<Vec<CellResult>> {
    let cells = run_benchmark(cfg)?;
    write_outputs(&cells, std::path::Path::new(&cfg.output_dir))?;
    Ok(cells)
}
