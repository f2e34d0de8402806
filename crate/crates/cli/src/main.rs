// SPDX-License-Identifier: Apache-2.0

mod cli;
mod commands;
mod error;
mod manifest;
mod report;

use clap::error::ErrorKind;
use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let parsed = match cli::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // help and version requests are not errors
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(parsed.command, &parsed.globals) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("wavetriage: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
