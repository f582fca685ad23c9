//! `lanetrace render` — visual overlay of a traced graph on its raster.
//!
//! Produces one RGB PNG of size `width x 2*height`: the top panel shows the
//! raster with the predicted boundaries, the bottom panel shows the raster
//! with the ground truth (or the plain raster when no `--gt` is given), so
//! the two can be compared by eye without flipping between files. Strokes
//! and fork markers use a fixed palette and the whole render is a pure
//! function of its inputs, byte for byte.

use crate::manifest::{self, RunManifest};
use crate::{CmdResult, Failure};
use clap::Args;
use image::{Rgb, RgbImage};
use lanetrace::dag::{LaneDag, VertexState};
use lanetrace::geom::{densify, Polyline};
use lanetrace::raster::IntensityRaster;
use lanetrace::{dag, store, Error};
use serde_json::json;
use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Predicted boundary strokes.
const PRED_STROKE: Rgb<u8> = Rgb([240, 140, 40]);
/// Predicted fork-vertex markers.
const PRED_FORK: Rgb<u8> = Rgb([255, 40, 40]);
/// Ground-truth boundary strokes.
const GT_STROKE: Rgb<u8> = Rgb([60, 140, 240]);
/// Ground-truth fork-vertex markers.
const GT_FORK: Rgb<u8> = Rgb([150, 60, 240]);
/// Spacing of the stroke sampling; below one pixel so no gaps appear.
const STROKE_SPACING_PX: f64 = 0.5;
/// Side length of the square fork marker, in pixels (odd, so it centers).
const FORK_MARKER_PX: i64 = 5;

#[derive(Args)]
pub struct RenderArgs {
    /// Intensity raster PNG to draw on
    #[arg(long)]
    pub raster: PathBuf,
    /// Predicted graph JSON (top panel)
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth graph JSON (bottom panel; plain raster if omitted)
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Output PNG path
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &RenderArgs) -> CmdResult {
    let started = Instant::now();
    let raster = store::read_intensity_raster(&args.raster)?;
    let pred = load_graph(&args.pred)?;
    let gt = args.gt.as_deref().map(load_graph).transpose()?;

    let (w, h) = (raster.width(), raster.height());
    let mut img = RgbImage::new(w as u32, 2 * h as u32);
    paint_panel(&mut img, &raster, 0, Some(&pred), PRED_STROKE, PRED_FORK)?;
    paint_panel(&mut img, &raster, h, gt.as_ref(), GT_STROKE, GT_FORK)?;

    let mut bytes = Vec::new();
    image::DynamicImage::ImageRgb8(img)
        .write_to(&mut Cursor::new(&mut bytes), image::ImageFormat::Png)
        .map_err(|e| Error::Format { what: "PNG", message: e.to_string() })?;
    store::write_atomic(&args.out, &bytes)?;

    let mut inputs = vec![args.raster.display().to_string(), args.pred.display().to_string()];
    if let Some(gt_path) = &args.gt {
        inputs.push(gt_path.display().to_string());
    }
    manifest::write(
        manifest::directory_of(&args.out),
        &RunManifest {
            command: "render",
            seed: None,
            config: json!({
                "stroke_spacing_px": STROKE_SPACING_PX,
                "fork_marker_px": FORK_MARKER_PX,
            }),
            inputs,
            outputs: vec![args.out.display().to_string()],
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        },
    )?;
    Ok(())
}

fn load_graph(path: &Path) -> Result<(LaneDag, Vec<Polyline>), Failure> {
    Ok(dag::from_json_value(&store::read_json(path)?)?)
}

/// Fills one panel (rows `[y_off, y_off + raster height)`) with the grayscale
/// raster, then overlays the graph's strokes and — last, so they always win
/// the pixel — its fork markers. `graph: None` leaves the raster plain.
fn paint_panel(
    img: &mut RgbImage,
    raster: &IntensityRaster,
    y_off: usize,
    graph: Option<&(LaneDag, Vec<Polyline>)>,
    stroke: Rgb<u8>,
    fork: Rgb<u8>,
) -> Result<(), Failure> {
    for (x, y, v) in raster.grid().iter_cells() {
        let g = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        img.put_pixel(x as u32, (y_off + y) as u32, Rgb([g, g, g]));
    }
    let Some((dag, polylines)) = graph else { return Ok(()) };
    let (w, h) = (raster.width() as i64, raster.height() as i64);
    let mut put = |x: i64, y: i64, color: Rgb<u8>| {
        if (0..w).contains(&x) && (0..h).contains(&y) {
            img.put_pixel(x as u32, (y_off as i64 + y) as u32, color);
        }
    };
    for poly in polylines {
        for p in densify(poly, STROKE_SPACING_PX).map_err(Failure::from)?.points() {
            put(p.x.round() as i64, p.y.round() as i64, stroke);
        }
    }
    for vertex in dag.iter().filter(|v| v.state == VertexState::Fork) {
        let (cx, cy) = (vertex.position.x.round() as i64, vertex.position.y.round() as i64);
        let r = FORK_MARKER_PX / 2;
        for dy in -r..=r {
            for dx in -r..=r {
                put(cx + dx, cy + dy, fork);
            }
        }
    }
    Ok(())
}
