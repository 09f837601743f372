use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    cvtele_cli::run(cvtele_cli::commands::Cli::parse())
}
