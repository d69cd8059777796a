use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qshift_cli::{env_seed, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = run(&cli.command, env_seed());
    if let Some(reason) = &report.reason {
        eprintln!("{}: {reason}", report.command);
    }
    let mut text = report.to_json();
    text.push('\n');
    // one write so a reader never sees a partial report
    let mut out = std::io::stdout().lock();
    if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
        return ExitCode::from(2);
    }
    ExitCode::from(report.status.exit_code() as u8)
}
