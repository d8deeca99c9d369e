//! `siegel`: command-line front end of the counting laboratory.
//!
//! Exit status: 0 on success, 2 when a precondition fails or input cannot be
//! used, 3 when a computation does not converge (partial results are still
//! written), 64 on malformed command lines.

mod args;
mod commands;
mod output;

use std::io;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use siegel_core::Error;

use args::Cli;
use output::{emit_plot_data, write_artifact, Artifact, Provenance};

pub enum Failure {
    Usage(String),
    Precondition(String),
    Core(Error),
    Io(io::Error),
    /// Did not converge; the artifact holds what was computed.
    Partial(Box<Artifact>, Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

const EXIT_PRECONDITION: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;
const EXIT_USAGE: u8 = 64;

fn code_for(e: &Error) -> u8 {
    match e {
        Error::Convergence { .. } | Error::Numeric(_) => EXIT_CONVERGENCE,
        _ => EXIT_PRECONDITION,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = match &f {
                Failure::Usage(m) => {
                    eprintln!("error: {m}");
                    EXIT_USAGE
                }
                Failure::Precondition(m) => {
                    eprintln!("error: {m}");
                    EXIT_PRECONDITION
                }
                Failure::Core(e) | Failure::Partial(_, e) => {
                    eprintln!("error: {e}");
                    code_for(e)
                }
                Failure::Io(e) => {
                    eprintln!("error: {e}");
                    EXIT_PRECONDITION
                }
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(Failure::Usage("thread count must be positive".into()));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let start = Instant::now();
    let mut config = serde_json::to_value(&cli.command).map_err(io::Error::from)?;
    let outcome = commands::run(&cli.command, &cli.global, &mut config);
    let (artifact, failure) = match outcome {
        Ok(a) => (a, None),
        Err(Failure::Partial(a, e)) => (*a, Some(e)),
        Err(f) => return Err(f),
    };
    let prov = Provenance {
        subcommand: cli.command.name(),
        seed: cli.global.seed,
        config,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_artifact(cli.global.format, &prov, &artifact, cli.global.output.as_deref())?;
    if let Some(path) = &cli.global.plot_data {
        emit_plot_data(artifact.plot.as_ref().unwrap_or(&artifact.table), path)?;
    }
    match failure {
        Some(e) => Err(Failure::Core(e)),
        None => Ok(()),
    }
}
