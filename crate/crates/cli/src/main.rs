//! `relbound`: batch front end writing bound curves as CSV and reports as JSON.
//!
//! Exit status 0 on success, 1 for usage, parse and validation errors, 2
//! when a solver did not converge (partial results are still written).

mod args;
mod commands;
mod compare;
mod error;
mod input;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Job;
use error::CliError;

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("RELBOUND_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("RELBOUND_THREADS must be a positive integer, found {text:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn execute(command: Command) -> Result<Vec<String>, CliError> {
    configure_threads()?;
    let (name, args) = match command {
        Command::Compare(args) => {
            let dom = compare::run(&args)?;
            println!("dominance: {}", dom.overall);
            return Ok(Vec::new());
        }
        Command::Divergence(a) => ("divergence", a),
        Command::Exponent(a) => ("exponent", a),
        Command::Radius(a) => ("radius", a),
        Command::Theta(a) => ("theta", a),
        Command::Umbrella(a) => ("umbrella", a),
        Command::Spumbrella(a) => ("spumbrella", a),
        Command::Hypotest(a) => ("hypotest", a),
        Command::Report(a) => ("report", a),
    };
    let mut job = Job::new(name, &args);
    commands::run(&mut job)?;
    Ok(job.failures)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for f in &failures {
                eprintln!("relbound: {f}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("relbound: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
