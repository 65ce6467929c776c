//! Experiment harness behind the `xlab` binary: seeded scatter runs,
//! conversion campaigns, output writers and the invariant checks.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod verify;

pub use config::{ConfigFile, ExperimentConfig, Family, System};
pub use error::{CliError, CliResult};
