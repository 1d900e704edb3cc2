//! Library side of the `fibersync` command-line tool: config parsing, the
//! experiment commands and their file outputs.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, Command, Outcome};
pub use config::RunConfig;
