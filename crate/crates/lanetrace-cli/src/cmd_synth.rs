//! `lanetrace synth` — write a procedural scene to a directory.

use crate::manifest::{self, RunManifest};
use crate::{CmdResult, Failure};
use clap::Args;
use lanetrace::synth::{self, EventSpec, NoiseSpec, SceneSpec};
use lanetrace::Error;
use serde_json::json;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Args)]
pub struct SynthArgs {
    /// RNG seed driving lateral drift and pixel noise
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lane count at the scene's left edge
    #[arg(long, default_value_t = 2)]
    pub lanes: u32,
    /// Comma-separated topology events along the road, e.g. "fork@150,merge@300" (meters)
    #[arg(long, default_value = "")]
    pub events: String,
    /// Standard deviation of additive Gaussian intensity noise
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    /// Probability that a pixel is zeroed outright
    #[arg(long, default_value_t = 0.0)]
    pub dropout: f64,
    /// Scene length in meters
    #[arg(long, default_value_t = 400.0)]
    pub length_m: f64,
    /// Lane width in meters
    #[arg(long, default_value_t = 3.7)]
    pub lane_width_m: f64,
    /// Output directory, created if missing
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &SynthArgs) -> CmdResult {
    let started = Instant::now();
    let spec = SceneSpec {
        seed: args.seed,
        num_lanes: args.lanes,
        length_m: args.length_m,
        lane_width_m: args.lane_width_m,
        events: parse_events(&args.events)?,
        noise: NoiseSpec { gaussian_sigma: args.noise_sigma, dropout_prob: args.dropout },
    };
    let scene = synth::generate(&spec)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|err| Error::io(args.out.display().to_string(), err))?;
    synth::scene_to_disk(&scene, &args.out)?;
    manifest::write(
        &args.out,
        &RunManifest {
            command: "synth",
            seed: Some(args.seed),
            config: serde_json::to_value(&spec).expect("a scene spec always serializes"),
            inputs: Vec::new(),
            outputs: vec![
                "raster.png".into(),
                "raster.json".into(),
                "gt.json".into(),
                "manifest.json".into(),
            ],
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        },
    )?;
    Ok(())
}

/// Parses the `--events` grammar: empty for none, otherwise comma-separated
/// `kind@position` tokens (`fork@150` starts a fork ramp 150 m in). Errors
/// name the offending token.
fn parse_events(list: &str) -> Result<Vec<EventSpec>, Failure> {
    list.split(',')
        .filter(|token| !token.is_empty())
        .map(|token| {
            let bad = |detail: String| {
                Failure::Input(Error::Format {
                    what: "event list",
                    message: format!("token \"{token}\": {detail}"),
                })
            };
            let (kind, position) = token
                .split_once('@')
                .ok_or_else(|| bad("expected kind@position, e.g. fork@150".into()))?;
            let position: f64 = position
                .parse()
                .map_err(|_| bad(format!("\"{position}\" is not a number of meters")))?;
            // Deserializing picks up the event schema (kind names, default
            // ramp length) without restating it here.
            serde_json::from_value(json!({
                "kind": kind,
                "longitudinal_position_m": position,
            }))
            .map_err(|err| bad(err.to_string()))
        })
        .collect()
}
