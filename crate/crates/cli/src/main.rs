use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use genlogic_cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli);
    let mut stdout = std::io::stdout().lock();
    match result {
        Ok(out) => {
            let _ = stdout.write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(CliError::Failed(report)) => {
            let _ = stdout.write_all(report.as_bytes());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
