//! Command implementations behind the `selftrig` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod suite;

pub use config::{parse_config, RunConfig};
pub use error::CliError;
