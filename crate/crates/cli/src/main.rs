mod args;
mod commands;
mod error;
mod proxy;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::EXIT_ARGUMENT;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_ARGUMENT as u8);
        }
    };
    let result = match cli.command {
        Command::Process(a) => commands::process(a),
        Command::Measure(a) => commands::measure(a),
        Command::Compare(a) => commands::compare(a),
        Command::AecDemo(a) => commands::aec_demo(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
