mod args;
mod eval;
mod filter;
mod manifest;
mod synth;

use std::process::ExitCode;

use baaf::{BaafError, Result};
use clap::Parser;

use args::{Cli, Command, ReplayArgs};
use manifest::RunManifest;

fn with_threads(threads: usize, f: impl FnOnce() -> Result<()> + Send) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BaafError::Internal(e.to_string()))?;
    pool.install(f)
}

fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Synth(a) => synth::run(a),
        Command::Filter(a) => with_threads(a.threads, || filter::run(a)),
        Command::Eval(a) => with_threads(a.threads, || eval::run(a)),
        Command::Replay(a) => replay(a),
    }
}

fn replay(args: &ReplayArgs) -> Result<()> {
    let run = RunManifest::read(&args.run)?;
    if run.version != env!("CARGO_PKG_VERSION") {
        return Err(BaafError::Validation(format!(
            "run was recorded with version {}, this is {}",
            run.version,
            env!("CARGO_PKG_VERSION")
        )));
    }
    run.verify_inputs()?;
    let mut command = run.command;
    match &mut command {
        Command::Synth(a) => {
            if let Some(out) = &args.out {
                a.out = out.clone();
            }
        }
        Command::Filter(a) => {
            if let Some(out) = &args.out {
                a.out = out.clone();
            }
            a.threads = args.threads.unwrap_or(a.threads);
        }
        Command::Eval(a) => {
            if let Some(out) = &args.out {
                a.out = out.clone();
            }
            a.threads = args.threads.unwrap_or(a.threads);
        }
        Command::Replay(_) => {
            return Err(BaafError::Validation("a replay cannot be replayed".into()));
        }
    }
    dispatch(&command)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
