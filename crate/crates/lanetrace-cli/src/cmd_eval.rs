//! `lanetrace eval` — score predicted graphs against ground truth.
//!
//! Takes one or more `--pred`/`--gt` pairs (matched by order), evaluates
//! precision/recall/F1 at the configured pixel thresholds plus per-boundary
//! topology correctness, and writes the report as JSON with a CSV twin
//! (same path, `.csv` extension) holding the aggregate table.

use crate::manifest::{self, RunManifest};
use crate::{CmdResult, Failure};
use clap::Args;
use lanetrace::eval::{precision_recall, report_to_csv, EvalConfig};
use lanetrace::geom::Polyline;
use lanetrace::{dag, store, Error};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Args)]
pub struct EvalArgs {
    /// Predicted graph JSON; repeat for a batch, pairing with --gt by order
    #[arg(long, required = true)]
    pub pred: Vec<PathBuf>,
    /// Ground-truth graph JSON; repeat to match --pred
    #[arg(long, required = true)]
    pub gt: Vec<PathBuf>,
    /// Distance thresholds in pixels
    #[arg(long, default_value = "2,3,5,10", value_delimiter = ',')]
    pub thresholds: Vec<f64>,
    /// Fraction of a boundary one assigned prediction must cover before the
    /// boundary counts as topology-correct (off by default)
    #[arg(long)]
    pub min_cover: Option<f64>,
    /// Worker threads for per-image terms
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Output report JSON path
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &EvalArgs) -> CmdResult {
    let started = Instant::now();
    if args.pred.len() != args.gt.len() {
        return Err(Failure::Input(Error::parameter(
            "gt",
            format!("{} predictions but {} ground truths", args.pred.len(), args.gt.len()),
        )));
    }
    let preds = load_polyline_sets(&args.pred)?;
    let gts = load_polyline_sets(&args.gt)?;
    let config = EvalConfig {
        thresholds_px: args.thresholds.clone(),
        min_cover: args.min_cover,
        jobs: args.jobs,
        ..EvalConfig::default()
    };
    let report = precision_recall(&preds, &gts, &config)?;

    store::write_json_atomic(
        &args.out,
        &serde_json::to_value(&report).expect("reports always serialize"),
    )?;
    let csv_path = args.out.with_extension("csv");
    store::write_atomic(&csv_path, report_to_csv(&report).as_bytes())?;
    manifest::write(
        manifest::directory_of(&args.out),
        &RunManifest {
            command: "eval",
            seed: None,
            config: json!({
                "thresholds_px": config.thresholds_px,
                "densify_spacing_px": config.densify_spacing_px,
                "min_cover": config.min_cover,
                "jobs": config.jobs,
            }),
            inputs: args
                .pred
                .iter()
                .chain(&args.gt)
                .map(|p| p.display().to_string())
                .collect(),
            outputs: vec![
                args.out.display().to_string(),
                csv_path.display().to_string(),
            ],
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        },
    )?;
    Ok(())
}

/// Loads the stored polylines of each graph file.
fn load_polyline_sets(paths: &[PathBuf]) -> Result<Vec<Vec<Polyline>>, Failure> {
    paths.iter().map(|path| load_polylines(path)).collect()
}

fn load_polylines(path: &Path) -> Result<Vec<Polyline>, Failure> {
    let (_, polylines) = dag::from_json_value(&store::read_json(path)?)?;
    Ok(polylines)
}
