mod args;
mod commands;
mod input;

use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;
use serde_json::Value;

use crate::args::Cli;

/// Exit 2 for bad input, 1 for a failed check or computation.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    pub fn from_error(e: impl std::error::Error) -> Self {
        CliError::input(e.to_string())
    }
}

#[derive(Serialize)]
struct RunReport {
    command: String,
    inputs: Value,
    results: Value,
    pass: bool,
    error: Option<String>,
    wall_time_s: f64,
    seed: u64,
    threads: usize,
    version: &'static str,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("RADON_HGF_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(format!("RADON_HGF_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::input(e.to_string()))
}

fn emit(report: &RunReport) {
    match serde_json::to_string_pretty(report) {
        Ok(s) => println!("{s}"),
        Err(e) => eprintln!("failed to serialize report: {e}"),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut report = RunReport {
        command: String::new(),
        inputs: Value::Null,
        results: Value::Null,
        pass: false,
        error: None,
        wall_time_s: 0.0,
        seed: 0,
        threads: 0,
        version: env!("CARGO_PKG_VERSION"),
    };
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report.error = Some(e.render().to_string());
            emit(&report);
            return ExitCode::from(2);
        }
    };
    report.seed = cli.seed;
    if let Ok(Value::Object(map)) = serde_json::to_value(&cli.command) {
        if let Some((name, inputs)) = map.into_iter().next() {
            report.command = name;
            report.inputs = inputs;
        }
    }
    let outcome = configure_threads().and_then(|_| {
        report.threads = rayon::current_num_threads();
        commands::run(&cli.command, cli.seed)
    });
    report.wall_time_s = start.elapsed().as_secs_f64();
    let code = match outcome {
        Ok((results, pass)) => {
            report.results = results;
            report.pass = pass;
            if pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            report.error = Some(e.message);
            e.code
        }
    };
    emit(&report);
    ExitCode::from(code)
}
