mod commands;
mod error;
mod input;
mod report;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

fn main() -> ExitCode {
    let cli = commands::Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = json!({"error": {"code": e.code(), "message": e.to_string()}});
            eprintln!("{body}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
