use std::panic;
use std::process::ExitCode;

use clap::Parser;
use eai_cli::app::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = panic::catch_unwind(|| run(cli));
    let code = match result {
        Ok(r) => {
            if let Err(e) = &r {
                eprintln!("error: {e:#}");
            }
            exit_code(&r)
        }
        Err(_) => 2,
    };
    ExitCode::from(code as u8)
}
