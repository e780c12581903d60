//! `starlap` — batch CLI over the segmentation pipeline.
//!
//! Subcommands: `gt` (ground-truth maps from labels), `segment` (maps to an
//! overlapping segmentation), `eval` (metrics report), `synth` (synthetic
//! overlap generation), `loss` (multi-task loss report).
//!
//! Exit codes: 0 success, 1 input/usage error, 2 constraint failure (synth
//! could not reach the requested overlap fraction).

mod commands;

use clap::{Parser, Subcommand};

use commands::{eval, gt, loss, segment, synth, CliError};

#[derive(Parser)]
#[command(
    name = "starlap",
    version,
    about = "Overlapping star-convex instance segmentation tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive ground-truth maps (p_obj, p_over, dist, valid) from labels.
    Gt(gt::GtArgs),
    /// Segment prediction maps into overlapping instances.
    Segment(segment::SegmentArgs),
    /// Evaluate predictions against ground truth labels.
    Eval(eval::EvalArgs),
    /// Generate a synthetic overlapping dataset from disjoint labels.
    Synth(synth::SynthArgs),
    /// Evaluate the multi-task loss of prediction maps against ground truth.
    Loss(loss::LossArgs),
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Gt(args) => gt::run(args),
        Command::Segment(args) => segment::run(args),
        Command::Eval(args) => eval::run(args),
        Command::Synth(args) => synth::run(args),
        Command::Loss(args) => loss::run(args),
    };
    match result {
        Ok(()) => 0,
        Err(CliError { message, exit_code }) => {
            eprintln!("error: {message}");
            exit_code
        }
    }
}
