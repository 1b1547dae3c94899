use std::process::ExitCode;

use clap::Parser;
use lpembed_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let verdict = if outcome.report.pass { "PASS" } else { "FAIL" };
            println!("{verdict} {}: {}", cli.command.name(), outcome.summary);
            for f in &outcome.report.failures {
                println!("  failed: {f}");
            }
            println!("  report: {}", outcome.report.config.out.join("report.json").display());
            ExitCode::from(if outcome.report.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
