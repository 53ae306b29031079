mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Output of a command in both renderings.
pub struct Report {
    pub text: String,
    pub json: serde_json::Value,
    /// Domain rejection that still produces a report, such as a failed
    /// validation.
    pub rejected: bool,
}

#[derive(Debug)]
pub enum CliError {
    /// Malformed arguments; exit code 2.
    Usage(String),
    /// Well-formed input that the domain rejects; exit code 1.
    Domain(anyhow::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Domain(e.into())
    }
}

fn jobs(cli: &Cli) -> Result<Option<usize>, CliError> {
    if let Some(j) = cli.jobs {
        return Ok(Some(j));
    }
    match std::env::var("MSCOTT_JOBS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            CliError::usage(format!("MSCOTT_JOBS must be a positive integer, got `{v}`"))
        }),
        Err(_) => Ok(None),
    }
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    if let Some(j) = jobs(cli)? {
        if j == 0 {
            return Err(CliError::usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    commands::dispatch(&cli.command)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            let body = if cli.json {
                serde_json::to_string_pretty(&report.json).expect("serializable") + "\n"
            } else {
                report.text
            };
            let _ = out.write_all(body.as_bytes());
            ExitCode::from(if report.rejected { 1 } else { 0 })
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `mscott --help` for usage");
            ExitCode::from(2)
        }
        Err(CliError::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
