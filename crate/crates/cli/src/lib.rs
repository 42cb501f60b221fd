//! File formats and subcommand implementations behind the `irrepsync` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod g2o;
pub mod graph_file;
pub mod settings;
pub mod sweep;

pub use error::{CliError, Result};
