use std::process::ExitCode;

use clap::Parser;
use mmd_cli::{run, Cli, CliError};

/// Applies `MMD_THREADS` before any parallel work starts.
fn limit_threads() -> Result<(), CliError> {
    match std::env::var("MMD_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("MMD_THREADS must be a positive integer, got {v:?}")))?;
            mmd_core::par::limit_threads(n).map_err(CliError::input)
        }
        Err(_) => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match limit_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
