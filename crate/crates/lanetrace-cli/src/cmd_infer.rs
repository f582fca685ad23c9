//! `lanetrace infer` — trace the lane-boundary graph of a raster.
//!
//! The tracing field is built one of three ways: from the raster's intensity
//! (default), from a precomputed field PNG (`--dt`, the seam where a learned
//! field model would plug in), or analytically from ground-truth polylines
//! (`--from-gt-dt`, oracle mode for benchmarks).

use crate::manifest::{self, RunManifest};
use crate::settings;
use crate::{CmdResult, Failure};
use clap::Args;
use lanetrace::inference::{discover, initial_vertices, recover};
use lanetrace::headers::HeaderSuite;
use lanetrace::raster::{field_from_intensity, inverse_threshold_dt};
use lanetrace::{dag, store, Error};
use serde_json::json;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Args)]
pub struct InferArgs {
    /// Input intensity raster (PNG with its JSON resolution sidecar)
    #[arg(long)]
    pub raster: PathBuf,
    /// Output graph JSON path
    #[arg(long)]
    pub out: PathBuf,
    /// Trace a precomputed distance-field PNG instead of building the field
    /// from the raster
    #[arg(long, conflicts_with = "from_gt_dt")]
    pub dt: Option<PathBuf>,
    /// Oracle mode: build the field analytically from this ground-truth
    /// graph JSON
    #[arg(long)]
    pub from_gt_dt: Option<PathBuf>,
    /// Tracing configuration JSON: {"header": {...}, "inference": {...}}
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run the coverage-gap recovery pass after discovery
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set,
          num_args = 0..=1, default_missing_value = "true")]
    pub recover: bool,
    /// Drop the first K starting vertices before tracing (ablation hook)
    #[arg(long, default_value_t = 0)]
    pub drop_init: usize,
    /// Intensity at or above which a raster pixel counts as boundary
    /// evidence when building the field
    #[arg(long, default_value_t = 0.7)]
    pub mask_threshold: f64,
    /// Field threshold for the seeding and recovery skeletons (overrides
    /// the configuration files)
    #[arg(long)]
    pub binarize_threshold: Option<f64>,
    /// Distance between consecutive vertices in pixels (overrides the
    /// configuration files)
    #[arg(long)]
    pub step_px: Option<f64>,
    /// Predictor window as WIDTHxHEIGHT cells, e.g. 100x100 (overrides the
    /// configuration files)
    #[arg(long)]
    pub roi: Option<String>,
}

pub fn run(args: &InferArgs) -> CmdResult {
    let started = Instant::now();
    let mut resolved = settings::resolve(args.config.as_deref())?;
    if let Some(step) = args.step_px {
        resolved.header.step_px = step;
    }
    if let Some(roi) = &args.roi {
        (resolved.header.roi_w, resolved.header.roi_h) = parse_roi(roi)?;
    }
    if let Some(threshold) = args.binarize_threshold {
        resolved.inference.binarize_threshold = threshold;
    }

    let raster = store::read_intensity_raster(&args.raster)?;
    let (field, field_source) = if let Some(path) = &args.dt {
        (store::read_distance_field(path)?.0, "dt")
    } else if let Some(path) = &args.from_gt_dt {
        let (_, polylines) = dag::from_json_value(&store::read_json(path)?)?;
        (inverse_threshold_dt(&polylines, raster.width(), raster.height())?, "gt-dt")
    } else {
        (field_from_intensity(&raster, args.mask_threshold)?, "raster")
    };

    let headers = HeaderSuite::new(resolved.header)?;
    let mut seeds = initial_vertices(&field, resolved.inference.binarize_threshold)?;
    seeds.drain(..args.drop_init.min(seeds.len()));
    let discovered = discover(&field, &headers, &seeds, &resolved.inference)?;
    let mut budget_exceeded = discovered.budget_exceeded;
    let result = if args.recover {
        let recovered = recover(&field, &headers, &discovered.dag, &resolved.inference)?;
        budget_exceeded |= recovered.budget_exceeded;
        recovered.dag
    } else {
        discovered.dag
    };

    // The library guarantees discovery output validates; a violation here is
    // a bug in the tool, not in the inputs.
    if let Some(violation) = result.validate().first() {
        return Err(Failure::Internal(format!("traced graph failed validation: {violation}")));
    }

    store::write_json_atomic(&args.out, &dag::to_json_value(&result))?;
    let mut inputs = vec![args.raster.display().to_string()];
    inputs.extend(args.dt.iter().chain(&args.from_gt_dt).map(|p| p.display().to_string()));
    manifest::write(
        manifest::directory_of(&args.out),
        &RunManifest {
            command: "infer",
            seed: None,
            config: json!({
                "header": serde_json::to_value(resolved.header).expect("configs serialize"),
                "inference": serde_json::to_value(resolved.inference).expect("configs serialize"),
                "config_sources": resolved.sources,
                "field_source": field_source,
                "mask_threshold": args.mask_threshold,
                "recover": args.recover,
                "drop_init": args.drop_init,
                "budget_exceeded": budget_exceeded,
            }),
            inputs,
            outputs: vec![args.out.display().to_string()],
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        },
    )?;
    Ok(())
}

/// Parses `--roi WIDTHxHEIGHT` into `(roi_w, roi_h)`.
fn parse_roi(text: &str) -> Result<(usize, usize), Failure> {
    let bad = || {
        Failure::Input(Error::parameter(
            "roi",
            format!("\"{text}\" is not WIDTHxHEIGHT, e.g. 100x100"),
        ))
    };
    let (w, h) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((w.trim().parse().map_err(|_| bad())?, h.trim().parse().map_err(|_| bad())?))
}
