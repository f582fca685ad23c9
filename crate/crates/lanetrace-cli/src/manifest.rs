//! The run manifest every command writes next to its outputs.
//!
//! A manifest records what was run (command name and tool version), with
//! what (resolved configuration snapshot, input paths, seed), and what came
//! out (output paths, wall-clock duration). Command, configuration, inputs,
//! and seed are sufficient to re-run the command; the wall-clock field is
//! informational and is the one field expected to differ between otherwise
//! identical runs.

use lanetrace::store;
use serde_json::{json, Value};
use std::path::Path;

/// File name used in every output directory.
pub const FILE_NAME: &str = "run_manifest.json";

/// Everything a run wants to remember about itself.
pub struct RunManifest<'a> {
    /// Subcommand name (`"synth"`, `"infer"`, ...).
    pub command: &'a str,
    /// The RNG seed, for commands that take one.
    pub seed: Option<u64>,
    /// Snapshot of the fully resolved configuration the run used.
    pub config: Value,
    /// Input paths as given on the command line.
    pub inputs: Vec<String>,
    /// Files the command wrote, relative to the manifest's directory where
    /// possible, as given otherwise.
    pub outputs: Vec<String>,
    /// Total run duration.
    pub wall_clock_seconds: f64,
}

/// Writes `run_manifest.json` into `directory` (atomically, like every
/// other artifact).
pub fn write(directory: &Path, manifest: &RunManifest<'_>) -> lanetrace::Result<()> {
    let value = json!({
        "command": manifest.command,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "seed": manifest.seed,
        "config": manifest.config,
        "inputs": manifest.inputs,
        "outputs": manifest.outputs,
        "wall_clock_seconds": manifest.wall_clock_seconds,
    });
    store::write_json_atomic(&directory.join(FILE_NAME), &value)
}

/// The directory a file output lives in (current directory when the path
/// has no parent), i.e. where the accompanying manifest goes.
pub fn directory_of(output_file: &Path) -> &Path {
    match output_file.parent() {
        Some(parent) if parent.as_os_str().is_empty() => Path::new("."),
        Some(parent) => parent,
        None => Path::new("."),
    }
}
