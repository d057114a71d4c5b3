//! Reproducible experiment runner: JSON config in, CSV and SVG out.

pub mod config;
pub mod error;
pub mod experiments;
pub mod table;

use std::path::{Path, PathBuf};

pub use config::{Experiment, ExperimentConfig};
pub use error::CliError;
pub use experiments::{run_experiment, RunOutput};
pub use table::{emit_artifacts, parse_csv, ResultTable};

/// Runs `experiment` on a pool of `threads` workers (0 = rayon default).
/// The output does not depend on the thread count.
pub fn run_with_threads(
    experiment: Experiment,
    config: &ExperimentConfig,
    threads: usize,
) -> Result<RunOutput, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    pool.install(|| run_experiment(experiment, config))
}

/// Runs and writes artifacts into `dir`. Monte Carlo rows flagged invalid
/// are written first and then reported as an error.
pub fn execute(
    experiment: Experiment,
    config: &ExperimentConfig,
    dir: &Path,
    threads: usize,
) -> Result<Vec<PathBuf>, CliError> {
    let out = run_with_threads(experiment, config, threads)?;
    let written = emit_artifacts(&out.table, dir)?;
    if !out.invalid_rows.is_empty() {
        return Err(CliError::MonteCarloInvalid(format!(
            "more than 5% of trials failed to converge in rows {:?}",
            out.invalid_rows
        )));
    }
    Ok(written)
}
