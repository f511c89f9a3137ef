use std::process::ExitCode;

use clap::Parser;
use dsr_core::cli::{run, Cli, RunConfig};
use dsr_core::Error;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::from_cli(&cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(summary) => {
            println!("{}", summary.message);
            ExitCode::SUCCESS
        }
        Err(e @ Error::InvalidArgument(_)) => {
            eprintln!("dsr: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("dsr: {e}");
            ExitCode::FAILURE
        }
    }
}
