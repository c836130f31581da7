use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use mi_seeker::cli::{execute, Cli, Exit};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                // usage errors share the configuration exit code
                _ => ExitCode::from(Exit::Config as u8),
            };
        }
    };
    ExitCode::from(execute(cli, &argv) as u8)
}
