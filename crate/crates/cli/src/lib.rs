//! Experiment runner for periodic-MDP learners: config parsing, parallel
//! simulation, aggregated curves, plots, manifests and bound checks.

pub mod config;
pub mod error;
pub mod plot;
pub mod report;
pub mod run;
pub mod selector;

use std::path::Path;

pub use config::ExperimentConfig;
pub use error::CliError;

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ExperimentConfig::parse(&text).map_err(|e| CliError::config(path, e))
}
