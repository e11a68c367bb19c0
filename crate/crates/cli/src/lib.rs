//! Command-line front end: file formats, run configuration and subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod whiteness;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};
