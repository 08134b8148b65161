//! Command-line front end for `squeezelab-core`: JSON configuration,
//! experiment drivers, and CSV/JSON output.

pub mod config;
pub mod output;
pub mod runs;

use std::path::Path;

use config::{parse_config_with, Overrides, RunConfig};
use output::{write_report, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error(transparent)]
    Core(#[from] squeezelab_core::error::Error),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_ASSERTION: u8 = 1;
/// Invalid configuration, refused resources, or anything else that stops a
/// run before its assertions are judged.
pub const EXIT_INVALID: u8 = 2;

/// Loads, validates, runs and writes one experiment.
pub fn execute(config_path: &Path, overrides: &Overrides) -> Result<(RunConfig, Report), CliError> {
    let document = std::fs::read_to_string(config_path)
        .map_err(|source| CliError::Io { context: format!("reading {}", config_path.display()), source })?;
    let cfg = parse_config_with(&document, overrides)?;
    let report = runs::run(&cfg)?;
    write_report(&cfg, &report, &cfg.output_dir)?;
    Ok((cfg, report))
}
