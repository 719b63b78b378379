//! The `wfr` experiment runner.
//!
//! Every experiment produces a CSV table and a JSON summary carrying
//! `artifact_version`, `config_echo`, `pass` and the list of failures.
//! Outputs depend only on the configuration and the seed, never on the
//! thread count or the clock; wall time is reported on standard error.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Value};
use wfr_core::{Error, Result};

use args::{Cli, Command, Format, WeightsAction};
use output::Outcome;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Exit code for a library error: numerical preconditions apart from bad input.
pub fn error_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run(args: Vec<OsString>) -> i32 {
    let args = match config::expand(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("wfr: {e}");
            return error_code(&e);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
        }
    };
    let Some(command) = cli.command else {
        eprintln!("wfr: no subcommand given (see --help)");
        return EXIT_USAGE;
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("wfr: cannot start worker threads: {e}");
            return EXIT_USAGE;
        }
    };
    let seed = cli.seed.unwrap_or(0);
    let format = cli.format.unwrap_or(Format::Csv);
    let start = Instant::now();
    let result = pool.install(|| dispatch(&command, seed, cli.out.as_deref()));
    match result {
        Err(e) => {
            eprintln!("wfr: {e}");
            error_code(&e)
        }
        Ok(Dispatched::Plot(path)) => {
            eprintln!("wfr: wrote {}", path.display());
            EXIT_PASS
        }
        Ok(Dispatched::Experiment(outcome, params)) => {
            let echo = json!({"experiment": outcome.name, "seed": seed, "params": params});
            if let Some(dir) = &cli.out {
                if let Err(e) = outcome.write(dir, &echo) {
                    eprintln!("wfr: {e}");
                    return error_code(&e);
                }
            }
            match format {
                Format::Csv => print!("{}", outcome.table.to_csv()),
                Format::Json => print!("{}", outcome.summary_json(&echo)),
            }
            let verdict = if outcome.pass() { "pass" } else { "FAIL" };
            eprintln!(
                "wfr: {} {verdict} in {:.2} s",
                outcome.name,
                start.elapsed().as_secs_f64()
            );
            for f in &outcome.failures {
                eprintln!("wfr:   {f}");
            }
            if outcome.pass() {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
    }
}

enum Dispatched {
    Experiment(Outcome, Value),
    Plot(PathBuf),
}

fn echo<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("argument structs serialize")
}

fn dispatch(command: &Command, seed: u64, out: Option<&std::path::Path>) -> Result<Dispatched> {
    let exp = |o: Result<Outcome>, p: Value| o.map(|o| Dispatched::Experiment(o, p));
    match command {
        Command::Exponents(a) => exp(commands::exponents(a), echo(a)),
        Command::Weights {
            action: WeightsAction::Verify(a),
        } => exp(commands::weights(a), echo(a)),
        Command::Decay(a) => exp(commands::decay(a), echo(a)),
        Command::ExtendScaling(a) => exp(commands::extend_scaling(a, seed), echo(a)),
        Command::Wavepackets(a) => exp(commands::wavepackets(a, seed), echo(a)),
        Command::Plot(a) => {
            let target = match (&a.output, out) {
                (Some(t), _) => t.clone(),
                (None, Some(dir)) => {
                    dir.join(a.csv.with_extension("svg").file_name().unwrap_or_default())
                }
                (None, None) => a.csv.with_extension("svg"),
            };
            plot::plot_file(&a.csv, &target)?;
            Ok(Dispatched::Plot(target))
        }
    }
}
