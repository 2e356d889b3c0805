//! `degenpop`: forward solves, null controls, inequality checks, parameter
//! sweeps and the acceptance suite, driven by a TOML file.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::Config;
use crate::error::CliError;
use crate::output::OutDir;

#[derive(Parser)]
#[command(name = "degenpop", version, about = "Degenerate age- and space-structured population toolkit")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration; every section is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (0 for all cores).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Treat violated structural hypotheses on k as errors.
    #[arg(long, global = true)]
    strict_hypotheses: bool,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Forward simulation from the configured initial datum.
    Solve,
    /// Null control of the configured datum.
    Control,
    /// Inequality checks; all configured families unless one is named.
    Verify { family: Option<String> },
    /// Grid, penalty and s sweeps.
    Sweep,
    /// The acceptance suite, run twice for determinism.
    Selftest,
}

fn run(args: Args) -> Result<(), CliError> {
    let config = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let jobs = match args.jobs {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    };
    let ctx = Context { config, jobs, strict: args.strict_hypotheses, out: OutDir::create(&args.out)? };
    match args.command {
        Command::Solve => commands::solve(ctx),
        Command::Control => commands::control(ctx),
        Command::Verify { family } => commands::verify(ctx, family),
        Command::Sweep => commands::sweep(ctx),
        Command::Selftest => commands::selftest(ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("degenpop: {e}");
            e.exit_code()
        }
    }
}
