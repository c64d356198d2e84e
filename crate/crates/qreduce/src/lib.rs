//! Configuration-driven scenario runner on top of `qreduce-core`.
//!
//! A run reads one JSON config, dispatches to a scenario in [`scenarios`],
//! and writes a CSV table plus a JSON summary through [`output`].

pub mod config;
pub mod error;
pub mod output;
pub mod scenarios;

use std::path::{Path, PathBuf};

pub use config::{ScenarioConfig, ScenarioKind};
pub use error::CliError;
pub use output::{CsvTable, Report};
pub use scenarios::{run, RunOutcome};

/// Paths written by [`run_config_file`].
#[derive(Debug, Clone, PartialEq)]
pub struct WrittenOutputs {
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Loads, runs and writes one scenario. Contract failures are returned as
/// [`CliError::Numerical`] after the outputs have been written.
pub fn run_config_file(
    path: &Path,
    out_dir: Option<&Path>,
    seed: Option<u64>,
) -> Result<(WrittenOutputs, RunOutcome), CliError> {
    let mut cfg = ScenarioConfig::from_path(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let outcome = run(&cfg)?;
    let (csv, json) = cfg.resolved_outputs(out_dir);
    outcome.report.write(&csv, &json)?;
    Ok((WrittenOutputs { csv, json }, outcome))
}
