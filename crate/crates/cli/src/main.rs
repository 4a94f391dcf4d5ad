mod args;
mod commands;
mod error;
mod sweep;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use engel_core::tol::set_tol_alg;
use serde_json::json;

use crate::args::Cli;
use crate::commands::Output;
use crate::error::{error_object, CliError};

fn apply_tolerance_override() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ENGEL_TOL") else {
        return Ok(());
    };
    let tol: f64 = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("ENGEL_TOL is not a number: {raw:?}")))?;
    if !set_tol_alg(tol) {
        return Err(CliError::Usage(format!(
            "ENGEL_TOL must be positive and finite, got {tol}"
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    let result = apply_tolerance_override().and_then(|_| commands::run(&cli.command, cli.seed));
    let mut stdout = std::io::stdout().lock();
    match result {
        Ok(Output::Json(value)) => {
            let _ = writeln!(stdout, "{value}");
            ExitCode::SUCCESS
        }
        Ok(Output::Text(text)) => {
            let _ = stdout.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(err) => {
            match &err {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Domain(e) => {
                    let _ = writeln!(stdout, "{}", json!({ "error": error_object(e) }));
                    eprintln!("error: {e}");
                }
            }
            ExitCode::from(err.exit_code())
        }
    }
}
