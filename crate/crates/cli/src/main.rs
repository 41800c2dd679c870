//! `cvs`: batch front end for fusion, CVS assessment, evaluation, the Sobel
//! loss kernel and synthetic corpora.
//!
//! Exit codes: 0 success, 2 input error, 3 internal invariant violation.
//! Errors are printed to stderr as one JSON line `{"error": .., "message": ..}`.

mod assess;
mod error;
mod eval;
mod fuse;
mod loss;
mod output;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cvs_core::config::RunConfig;

use crate::error::{CliError, CliResult, EXIT_INTERNAL};

#[derive(Parser, Debug)]
#[command(name = "cvs", version, about = "Rule-based Critical View of Safety assessment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Merge a Stream 1 map and a Stream 2 (fat) map into a fused map.
    Fuse(fuse::FuseArgs),
    /// Assess every fused frame of a directory, one JSON line per frame.
    Assess(assess::AssessArgs),
    /// Score an assessment report against per-frame truth files.
    Eval(eval::EvalArgs),
    /// Evaluate the cross-entropy + Sobel loss on dense text tensors.
    Loss(loss::LossArgs),
    /// Write a deterministic synthetic corpus.
    Synth(synth::SynthArgs),
}

pub(crate) fn load_config(path: Option<&PathBuf>) -> CliResult<RunConfig> {
    match path {
        Some(p) => Ok(RunConfig::load(p)?),
        None => Ok(RunConfig::default()),
    }
}

pub(crate) fn thread_pool(jobs: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::input("InvalidArgument", "--jobs must be at least 1"));
        }
        b = b.num_threads(j);
    }
    b.build().map_err(|e| CliError::internal("ThreadPool", e))
}

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|info| {
        let err = CliError::internal("InternalInvariantViolation", info);
        eprintln!("{}", err.json_line());
        std::process::exit(EXIT_INTERNAL as i32);
    }));

    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return CliError::input("InvalidArgument", e.to_string().trim()).report(),
    };
    let result = match cli.command {
        Command::Fuse(a) => fuse::run(a),
        Command::Assess(a) => assess::run(a),
        Command::Eval(a) => eval::run(a),
        Command::Loss(a) => loss::run(a),
        Command::Synth(a) => synth::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
