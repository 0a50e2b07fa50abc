//! Command-line driver: TOML configuration, experiment execution and result files.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;

pub use commands::{cmd_simulate, cmd_sweep, cmd_theory, cmd_verify, Format, Outcome};
pub use config::RunConfig;
pub use error::CliError;
