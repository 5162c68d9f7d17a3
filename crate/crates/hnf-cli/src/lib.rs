//! Library side of the `hnf` command-line tool: input parsing, reports and
//! the subcommands themselves. `main.rs` only dispatches.

pub mod commands;
pub mod config;
pub mod parse;
pub mod report;

pub use commands::{run, CliError};
pub use config::RunConfig;
