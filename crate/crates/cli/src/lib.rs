//! Command-line front end: configuration parsing, experiment dispatch and
//! artifact output.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{run_command, Command, ExperimentSpec, Outcome};
pub use config::parse_config;
pub use error::CliError;
