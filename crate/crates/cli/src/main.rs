//! `momenta`: command line front end. Each subcommand writes one
//! self-describing artifact (JSON, or CSV with `#` metadata lines).

mod args;
mod artifact;
mod commands;
mod failure;

use std::process::ExitCode;

use clap::Parser;
use momenta::Execution;

use args::Cli;

/// Resolved parallelism for a run.
#[derive(Clone, Copy, Debug)]
pub struct Runtime {
    pub threads: usize,
    pub exec: Execution,
}

fn runtime(flag: Option<usize>) -> Result<Runtime, failure::Failure> {
    let env = match std::env::var("MOMENTA_THREADS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| failure::Failure::Input(format!("MOMENTA_THREADS={v:?} is not a positive integer")))?,
        ),
        Err(_) => None,
    };
    let requested = env.or(flag);
    let threads = match requested {
        Some(n) => {
            momenta::par::set_threads(n);
            n
        }
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let exec = if threads == 1 { Execution::Sequential } else { Execution::available() };
    let threads = if exec.is_parallel() { threads } else { 1 };
    Ok(Runtime { threads, exec })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = runtime(cli.threads).and_then(|rt| commands::run(&cli, rt));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("momenta: {e}");
            e.exit_code()
        }
    }
}
