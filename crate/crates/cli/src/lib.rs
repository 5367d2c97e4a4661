//! Experiment runner for the `gapsim_core` schedulers: configuration, parallel sweeps,
//! CSV and SVG reporting, and the `verify` property suite.

pub mod charts;
pub mod config;
pub mod error;
pub mod experiment;
pub mod verify;

pub use config::{Algorithm, Emit, ExperimentConfig, Sweep, Workload};
pub use error::CliError;
pub use experiment::{run_experiment, write_csv, Outcome, Row, CSV_HEADER};
