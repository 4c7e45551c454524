//! Command-line front end: configuration, validation and experiment runners.

pub mod config;
pub mod error;
pub mod job;
pub mod parse;
pub mod run;
pub mod svg;

pub use config::{command_spec, parse_config_file, CommandSpec, ExperimentConfig, KeySpec, COMMANDS};
pub use error::{CliError, CliResult};
pub use job::{Job, Plan, Units};
pub use run::{run, run_to};
