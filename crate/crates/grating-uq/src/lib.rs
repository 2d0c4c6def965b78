//! Command-line driver for `grating-uq-core`: experiment configuration,
//! artifact formats, and a parallel Monte Carlo runner.

pub mod commands;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod formats;

pub use config::ExperimentConfig;
pub use error::CliError;
