//! Library side of the `helmsrc` command: configuration, the `simulate` /
//! `reconstruct` commands and the built-in experiments.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
pub use experiments::{run_experiment, ExperimentName, RunOptions};
