//! `lanetrace` — the command-line pipeline around the lanetrace library.
//!
//! Four subcommands cover the full loop: `synth` writes a procedural scene
//! to disk, `infer` traces a lane graph out of a raster, `eval` scores
//! predicted graphs against ground truth, and `render` draws an overlay
//! figure. Every command drops a `run_manifest.json` next to its outputs
//! with enough information (command, resolved configuration, inputs, seed)
//! to reproduce the run.
//!
//! Exit codes: 0 on success (including a budget-limited but valid trace),
//! 2 for usage and input problems (bad flags, malformed files, missing
//! paths, infeasible scene specs), 3 when the tool breaks one of its own
//! guarantees (a traced graph that fails validation).

mod cmd_eval;
mod cmd_infer;
mod cmd_render;
mod cmd_synth;
mod manifest;
mod settings;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

/// Lane-boundary tracing toolkit: synthesize scenes, trace graphs,
/// evaluate, render.
#[derive(Parser)]
#[command(name = "lanetrace", version, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic highway scene (raster + ground truth) on disk
    Synth(cmd_synth::SynthArgs),
    /// Trace the lane-boundary graph of a raster and write it as JSON
    Infer(cmd_infer::InferArgs),
    /// Score predicted graphs against ground truth (JSON report + CSV twin)
    Eval(cmd_eval::EvalArgs),
    /// Draw a two-panel overlay figure: predictions over the raster on top,
    /// ground truth below
    Render(cmd_render::RenderArgs),
}

/// A failed command, carrying the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// The caller handed us something unusable: bad flag values, malformed
    /// or missing files, an infeasible scene. Exit code 2.
    Input(lanetrace::Error),
    /// The tool violated a guarantee it makes about its own output. Exit
    /// code 3.
    Internal(String),
}

impl From<lanetrace::Error> for Failure {
    fn from(err: lanetrace::Error) -> Self {
        Failure::Input(err)
    }
}

/// Shorthand for command entry points.
pub type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    // Clap itself exits with code 2 on usage errors, matching Failure::Input.
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Synth(args) => cmd_synth::run(args),
        Command::Infer(args) => cmd_infer::run(args),
        Command::Eval(args) => cmd_eval::run(args),
        Command::Render(args) => cmd_render::run(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(message)) => {
            eprintln!("internal error: {message}");
            ExitCode::from(3)
        }
    }
}
