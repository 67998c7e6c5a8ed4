mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use config::Cli;

/// Exit status for bad flags, unreadable inputs and rejected parameters.
const EXIT_VALIDATION: u8 = 2;
/// Exit status when the numerics fail on otherwise valid input.
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(EXIT_NUMERICAL)
            } else {
                ExitCode::from(EXIT_VALIDATION)
            }
        }
    }
}
