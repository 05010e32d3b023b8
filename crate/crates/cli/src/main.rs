use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use duopoly_cli::args::Cli;
use duopoly_cli::failure::{Failure, EXIT_OK};

fn report(failure: &Failure) -> ExitCode {
    let line = serde_json::to_string(&failure.record()).expect("error record serializes");
    eprintln!("{line}");
    ExitCode::from(failure.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => return report(&Failure::Validation(e.to_string().trim().to_string())),
    };
    match duopoly_cli::run(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(f) => report(&f),
    }
}
