//! Procedural highway scenes: ground-truth lane graphs with forks and
//! merges, rendered to noisy bird's-eye intensity rasters.
//!
//! A scene is a bundle of parallel lane boundaries drifting together on a
//! single low-frequency sinusoid (real highways curve as a unit, and shared
//! drift keeps the lane width exact everywhere). Topology events act on the
//! *outermost* (largest-y) boundary: a fork births a new boundary that peels
//! off it by one lane width over a smoothstep ramp and becomes the new
//! outermost; a merge is the time-reverse — the outermost ramps back into
//! its neighbor and dies at the contact point. Keeping all events at the
//! road's outer edge means the surviving boundary of every merge lies above
//! the dying one, so a scan-ordered tracer always claims the survivor first
//! — the convergence test during discovery depends on that ordering.
//!
//! Everything is deterministic in the seed: geometry parameters, Gaussian
//! noise, and dropout speckle each draw from their own numbered stream of a
//! counter-based generator, so adding noise never perturbs the geometry.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dag::{from_json_value, to_json_value, LaneDag, VertexState};
use crate::error::{Error, Result};
use crate::geom::{Angle, Point, Polyline};
use crate::grid::Grid;
use crate::raster::{IntensityRaster, DEFAULT_RESOLUTION_M_PER_PX};
use crate::store::{
    read_intensity_raster, read_json, sidecar_path, write_intensity_raster, write_json_atomic,
};

/// Painted lane-boundary stroke intensity.
pub const STROKE_INTENSITY: f64 = 0.9;
/// Road-surface intensity between and just beyond the outer boundaries.
pub const ROAD_INTENSITY: f64 = 0.35;
/// Off-road background intensity.
pub const BACKGROUND_INTENSITY: f64 = 0.05;

/// Stroke thickness in rows (boundaries are near-horizontal everywhere).
const STROKE_HALF_WIDTH_PX: i64 = 1;
/// How far the road surface extends beyond the outer boundaries.
const ROAD_APRON_PX: f64 = 8.0;
/// Clearance kept between any boundary and the raster's top/bottom edges,
/// so boundaries only ever enter and leave through the left/right edges.
const VERTICAL_MARGIN_PX: f64 = 32.0;
/// Longitudinal spacing of ground-truth vertices.
const GT_VERTEX_SPACING_PX: f64 = 50.0;
/// Lateral drift sinusoid: amplitude range (meters). The ceiling keeps the
/// tallest scene within the height budget of a bird's-eye tile.
const DRIFT_AMPLITUDE_M: (f64, f64) = (2.0, 8.0);
/// Lateral drift sinusoid: wavelength range (meters). The floor keeps
/// curvature far below what the tracer's window geometry assumes.
const DRIFT_WAVELENGTH_M: (f64, f64) = (200.0, 400.0);

/// Topology event kinds. A fork births a lane at the outer edge; a merge
/// removes one there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Fork,
    Merge,
}

/// One topology event on the outermost boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub kind: EventKind,
    /// Where the ramp begins, measured along the road.
    pub longitudinal_position_m: f64,
    /// Length of the smoothstep ramp carrying the lateral offset.
    #[serde(default = "default_ramp_length_m")]
    pub ramp_length_m: f64,
}

fn default_ramp_length_m() -> f64 {
    80.0
}

/// Pixel-level corruption applied after rendering.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// Standard deviation of additive Gaussian noise.
    pub gaussian_sigma: f64,
    /// Probability that a pixel is zeroed outright.
    pub dropout_prob: f64,
}

/// Full description of a synthetic scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSpec {
    pub seed: u64,
    pub num_lanes: u32,
    pub length_m: f64,
    pub lane_width_m: f64,
    pub events: Vec<EventSpec>,
    pub noise: NoiseSpec,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            seed: 0,
            num_lanes: 2,
            length_m: 400.0,
            lane_width_m: 3.7,
            events: Vec::new(),
            noise: NoiseSpec::default(),
        }
    }
}

impl SceneSpec {
    /// Checks the scalar ranges and the feasibility of the event list:
    /// events must be sorted, their ramps must fit strictly inside the scene
    /// without overlapping one another, and no merge may drop the lane count
    /// below one. Event problems name the offending index.
    pub fn validate(&self) -> Result<()> {
        if self.num_lanes < 2 {
            return Err(Error::parameter("num_lanes", "at least 2 lanes required"));
        }
        if !(self.length_m > 0.0) || !self.length_m.is_finite() {
            return Err(Error::parameter("length_m", "must be positive"));
        }
        if !(self.lane_width_m > 0.0) || !self.lane_width_m.is_finite() {
            return Err(Error::parameter("lane_width_m", "must be positive"));
        }
        if !(self.noise.gaussian_sigma >= 0.0) || !self.noise.gaussian_sigma.is_finite() {
            return Err(Error::parameter("gaussian_sigma", "must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.noise.dropout_prob) {
            return Err(Error::parameter("dropout_prob", "must lie in [0, 1)"));
        }

        let mut lanes = self.num_lanes as i64;
        let mut prev_end = f64::NEG_INFINITY;
        let mut prev_position = f64::NEG_INFINITY;
        for (index, event) in self.events.iter().enumerate() {
            let infeasible = |message: &str| Error::InfeasibleEvent {
                index,
                message: message.to_string(),
            };
            let p = event.longitudinal_position_m;
            if !(event.ramp_length_m > 0.0) || !event.ramp_length_m.is_finite() {
                return Err(infeasible("ramp length must be positive"));
            }
            if !p.is_finite() || p < prev_position {
                return Err(infeasible("events must be sorted by position"));
            }
            if p <= 0.0 || p + event.ramp_length_m >= self.length_m {
                return Err(infeasible("ramp must lie strictly inside the scene"));
            }
            if p < prev_end {
                return Err(infeasible("ramp overlaps the previous event's ramp"));
            }
            match event.kind {
                EventKind::Fork => lanes += 1,
                EventKind::Merge => {
                    lanes -= 1;
                    if lanes < 1 {
                        return Err(infeasible("merge would leave no lane"));
                    }
                }
            }
            prev_position = p;
            prev_end = p + event.ramp_length_m;
        }
        Ok(())
    }
}

/// A generated scene: the rendered raster plus its ground truth.
#[derive(Debug, Clone)]
pub struct GroundTruthScene {
    pub raster: IntensityRaster,
    pub gt_dag: LaneDag,
    /// Exactly the boundary traces of `gt_dag` (one per root and per fork).
    pub gt_polylines: Vec<Polyline>,
}

// ───────────────────────── geometry ─────────────────────────

/// One smoothstep lateral offset: 0 before `start_px`, `delta_px` after
/// `start_px + len_px`, C¹ in between.
#[derive(Debug, Clone, Copy)]
struct Ramp {
    start_px: f64,
    len_px: f64,
    delta_px: f64,
}

impl Ramp {
    fn offset(&self, x: f64) -> f64 {
        let u = ((x - self.start_px) / self.len_px).clamp(0.0, 1.0);
        self.delta_px * u * u * (3.0 - 2.0 * u)
    }

    fn slope(&self, x: f64) -> f64 {
        let u = (x - self.start_px) / self.len_px;
        if !(0.0..=1.0).contains(&u) {
            return 0.0;
        }
        self.delta_px * 6.0 * u * (1.0 - u) / self.len_px
    }
}

/// One lane boundary over its lifetime `[birth_px, death_px]`.
#[derive(Debug, Clone)]
struct BoundaryCurve {
    /// Static lateral offset (a multiple of the lane width).
    base_px: f64,
    /// Lateral offsets accumulated from fork births and merge deaths; a
    /// curve born at a fork inherits a snapshot of its parent's ramps so the
    /// two coincide exactly at the fork point.
    ramps: Vec<Ramp>,
    birth_px: f64,
    death_px: f64,
}

impl BoundaryCurve {
    fn alive_at(&self, x: f64) -> bool {
        (self.birth_px..=self.death_px).contains(&x)
    }
}

/// Shared scene geometry: the drift sinusoid plus every boundary curve.
struct SceneGeometry {
    curves: Vec<BoundaryCurve>,
    amp_px: f64,
    wavelength_px: f64,
    phase: f64,
}

impl SceneGeometry {
    fn drift(&self, x: f64) -> f64 {
        self.amp_px * ((std::f64::consts::TAU * x / self.wavelength_px) + self.phase).sin()
    }

    fn drift_slope(&self, x: f64) -> f64 {
        let k = std::f64::consts::TAU / self.wavelength_px;
        self.amp_px * k * ((k * x) + self.phase).cos()
    }

    /// Boundary centerline row at column `x` (pixels).
    fn y(&self, curve: usize, x: f64) -> f64 {
        let c = &self.curves[curve];
        VERTICAL_MARGIN_PX
            + self.amp_px
            + self.drift(x)
            + c.base_px
            + c.ramps.iter().map(|r| r.offset(x)).sum::<f64>()
    }

    /// Boundary tangent heading at column `x`.
    fn heading(&self, curve: usize, x: f64) -> Angle {
        let c = &self.curves[curve];
        let slope = self.drift_slope(x) + c.ramps.iter().map(|r| r.slope(x)).sum::<f64>();
        Angle::new(slope.atan())
    }
}

/// What interrupts a chain's regular vertex grid.
enum Breakpoint {
    /// Fork vertex at this column; the value is the born curve's index.
    Fork(f64, usize),
    /// Terminate vertex at this column (merge contact point).
    Terminate(f64),
}

impl Breakpoint {
    fn x(&self) -> f64 {
        match *self {
            Breakpoint::Fork(x, _) | Breakpoint::Terminate(x) => x,
        }
    }
}

// ───────────────────────── generation ─────────────────────────

/// Generates a scene from its spec: derives the geometry, builds the ground
/// truth graph, renders the raster, and applies noise. Deterministic for a
/// fixed spec.
pub fn generate(spec: &SceneSpec) -> Result<GroundTruthScene> {
    spec.validate()?;
    let res = DEFAULT_RESOLUTION_M_PER_PX;
    let width_px = (spec.length_m / res).round() as usize;
    let lane_width_px = spec.lane_width_m / res;

    // Stream 0: geometry. Draw order is part of the reproducibility
    // contract: amplitude, then wavelength, then phase.
    let mut geometry_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    geometry_rng.set_stream(0);
    let amp_px = geometry_rng.gen_range(DRIFT_AMPLITUDE_M.0..DRIFT_AMPLITUDE_M.1) / res;
    let wavelength_px =
        geometry_rng.gen_range(DRIFT_WAVELENGTH_M.0..DRIFT_WAVELENGTH_M.1) / res;
    let phase = geometry_rng.gen_range(0.0..std::f64::consts::TAU);

    let (geometry, breaks) = build_curves(spec, lane_width_px, width_px, amp_px, wavelength_px, phase);
    let (gt_dag, gt_polylines) = build_ground_truth(&geometry, &breaks, spec.num_lanes, width_px);
    let raster = render(spec, &geometry, width_px, res)?;
    Ok(GroundTruthScene { raster, gt_dag, gt_polylines })
}

/// Simulates the event list into boundary curves, tracking which boundary is
/// outermost. Returns the geometry plus each curve's breakpoints (forks it
/// parents, the merge that kills it), already in increasing-x order.
fn build_curves(
    spec: &SceneSpec,
    lane_width_px: f64,
    width_px: usize,
    amp_px: f64,
    wavelength_px: f64,
    phase: f64,
) -> (SceneGeometry, Vec<Vec<Breakpoint>>) {
    let end_px = (width_px - 1) as f64;
    let founder_count = spec.num_lanes as usize + 1;
    let mut curves: Vec<BoundaryCurve> = (0..founder_count)
        .map(|i| BoundaryCurve {
            base_px: i as f64 * lane_width_px,
            ramps: Vec::new(),
            birth_px: 0.0,
            death_px: end_px,
        })
        .collect();
    let mut breaks: Vec<Vec<Breakpoint>> = (0..founder_count).map(|_| Vec::new()).collect();
    // Indices of living boundaries, top to bottom; the last is outermost.
    let mut stack: Vec<usize> = (0..founder_count).collect();

    for event in &spec.events {
        let p = event.longitudinal_position_m / DEFAULT_RESOLUTION_M_PER_PX;
        let len = event.ramp_length_m / DEFAULT_RESOLUTION_M_PER_PX;
        match event.kind {
            EventKind::Fork => {
                let parent = *stack.last().expect("at least two boundaries are always alive");
                let mut ramps = curves[parent].ramps.clone();
                ramps.push(Ramp { start_px: p, len_px: len, delta_px: lane_width_px });
                let child = curves.len();
                curves.push(BoundaryCurve {
                    base_px: curves[parent].base_px,
                    ramps,
                    birth_px: p,
                    death_px: end_px,
                });
                breaks.push(Vec::new());
                breaks[parent].push(Breakpoint::Fork(p, child));
                stack.push(child);
            }
            EventKind::Merge => {
                let dying = stack.pop().expect("validated specs keep at least one lane");
                let contact = p + len;
                curves[dying].ramps.push(Ramp {
                    start_px: p,
                    len_px: len,
                    delta_px: -lane_width_px,
                });
                curves[dying].death_px = contact;
                breaks[dying].push(Breakpoint::Terminate(contact));
            }
        }
    }
    (SceneGeometry { curves, amp_px, wavelength_px, phase }, breaks)
}

/// Lays ground-truth vertices along every boundary: a vertex every
/// [`GT_VERTEX_SPACING_PX`] columns, the exact fork position where a
/// boundary splits, and the exact contact position where one dies into its
/// neighbor. Chains are assembled the way discovery walks them — founders
/// top to bottom, then forked-off boundaries in birth order, each starting
/// one spacing past its fork vertex.
fn build_ground_truth(
    geometry: &SceneGeometry,
    breaks: &[Vec<Breakpoint>],
    num_lanes: u32,
    width_px: usize,
) -> (LaneDag, Vec<Polyline>) {
    let end_px = (width_px - 1) as f64;
    let mut dag = LaneDag::new();
    let mut queue: std::collections::VecDeque<(u32, usize, f64)> = std::collections::VecDeque::new();

    let lay_chain = |dag: &mut LaneDag,
                         queue: &mut std::collections::VecDeque<(u32, usize, f64)>,
                         curve: usize,
                         start_x: f64,
                         attach_to: Option<u32>| {
        let mut current = attach_to;
        let mut x = start_x;
        let mut append = |dag: &mut LaneDag, x: f64, state: VertexState| {
            let position = Point::new(x, geometry.y(curve, x));
            let heading = geometry.heading(curve, x);
            let id = match current {
                None => dag.add_root(position, heading, state),
                Some(parent) => dag.add_child(parent, position, heading, state),
            };
            current = Some(id);
            id
        };
        for breakpoint in &breaks[curve] {
            while x < breakpoint.x() - 1.0 {
                append(&mut *dag, x, VertexState::Normal);
                x += GT_VERTEX_SPACING_PX;
            }
            match *breakpoint {
                Breakpoint::Fork(fork_x, child) => {
                    let fork_id = append(&mut *dag, fork_x, VertexState::Fork);
                    queue.push_back((fork_id, child, fork_x + GT_VERTEX_SPACING_PX));
                    x = fork_x + GT_VERTEX_SPACING_PX;
                }
                Breakpoint::Terminate(contact_x) => {
                    append(&mut *dag, contact_x, VertexState::Terminate);
                    return;
                }
            }
        }
        let mut last = f64::NEG_INFINITY;
        while x <= end_px {
            append(&mut *dag, x, VertexState::Normal);
            last = x;
            x += GT_VERTEX_SPACING_PX;
        }
        if end_px - last >= 1.0 {
            append(&mut *dag, end_px, VertexState::Normal);
        }
    };

    for founder in 0..=num_lanes as usize {
        lay_chain(&mut dag, &mut queue, founder, 0.0, None);
        // Expand boundaries born from this founder's forks before moving on,
        // in the order discovery would pop them.
        while let Some((fork_id, curve, start_x)) = queue.pop_front() {
            lay_chain(&mut dag, &mut queue, curve, start_x, Some(fork_id));
        }
    }
    let polylines = dag.to_polylines();
    (dag, polylines)
}

/// Paints the raster: background, road surface spanning the living
/// boundaries plus an apron, bright three-row strokes on every boundary,
/// then Gaussian noise (stream 1) and dropout speckle (stream 2), clamped
/// to [0, 1].
fn render(
    spec: &SceneSpec,
    geometry: &SceneGeometry,
    width_px: usize,
    res: f64,
) -> Result<IntensityRaster> {
    let max_y = (0..width_px)
        .flat_map(|col| {
            let x = col as f64;
            geometry
                .curves
                .iter()
                .enumerate()
                .filter(move |(_, c)| c.alive_at(x))
                .map(move |(i, _)| i)
                .map(move |i| geometry.y(i, x))
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let height_px = (max_y + VERTICAL_MARGIN_PX).ceil() as usize;

    let mut grid = Grid::filled(width_px, height_px, BACKGROUND_INTENSITY);
    for col in 0..width_px {
        let x = col as f64;
        let rows: Vec<f64> = (0..geometry.curves.len())
            .filter(|&i| geometry.curves[i].alive_at(x))
            .map(|i| geometry.y(i, x))
            .collect();
        let top = rows.iter().copied().fold(f64::INFINITY, f64::min) - ROAD_APRON_PX;
        let bottom = rows.iter().copied().fold(f64::NEG_INFINITY, f64::max) + ROAD_APRON_PX;
        for row in (top.round() as i64).max(0)..=(bottom.round() as i64).min(height_px as i64 - 1)
        {
            *grid.get_mut(col, row as usize) = ROAD_INTENSITY;
        }
        for y in rows {
            let center = y.round() as i64;
            for row in center - STROKE_HALF_WIDTH_PX..=center + STROKE_HALF_WIDTH_PX {
                if (0..height_px as i64).contains(&row) {
                    *grid.get_mut(col, row as usize) = STROKE_INTENSITY;
                }
            }
        }
    }

    if spec.noise.gaussian_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(1);
        let normal = Normal::new(0.0, spec.noise.gaussian_sigma)
            .expect("validated sigma is finite and non-negative");
        for v in grid.raw_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    if spec.noise.dropout_prob > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(2);
        let dropout = Bernoulli::new(spec.noise.dropout_prob)
            .expect("validated probability lies in [0, 1)");
        for v in grid.raw_mut() {
            if dropout.sample(&mut rng) {
                *v = 0.0;
            }
        }
    }
    for v in grid.raw_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    IntensityRaster::new(grid, res)
}

// ───────────────────────── persistence ─────────────────────────

/// File names written by [`scene_to_disk`].
const RASTER_FILE: &str = "raster.png";
const GROUND_TRUTH_FILE: &str = "gt.json";
const MANIFEST_FILE: &str = "manifest.json";

/// Writes a scene to `directory`: the raster PNG with its resolution
/// sidecar, the ground-truth graph with its polylines, and a manifest
/// listing the three data files. Each file is written atomically.
pub fn scene_to_disk(scene: &GroundTruthScene, directory: &Path) -> Result<()> {
    let png = directory.join(RASTER_FILE);
    write_intensity_raster(&png, &scene.raster)?;
    write_json_atomic(&directory.join(GROUND_TRUTH_FILE), &to_json_value(&scene.gt_dag))?;
    let sidecar = sidecar_path(&png);
    let manifest = serde_json::json!({
        "files": [
            GROUND_TRUTH_FILE,
            sidecar.file_name().and_then(|n| n.to_str()).unwrap_or_default(),
            RASTER_FILE,
        ],
        "width": scene.raster.width(),
        "height": scene.raster.height(),
    });
    write_json_atomic(&directory.join(MANIFEST_FILE), &manifest)
}

/// Reads back a scene written by [`scene_to_disk`]. The raster goes through
/// 16-bit quantization, so intensities agree with the original to within
/// 1/65535; the graph round-trips exactly.
pub fn scene_from_disk(directory: &Path) -> Result<GroundTruthScene> {
    let raster = read_intensity_raster(&directory.join(RASTER_FILE))?;
    let value = read_json(&directory.join(GROUND_TRUTH_FILE))?;
    let (gt_dag, gt_polylines) = from_json_value(&value)?;
    Ok(GroundTruthScene { raster, gt_dag, gt_polylines })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::deterministic_json;

    fn spec(seed: u64, lanes: u32, events: Vec<EventSpec>) -> SceneSpec {
        SceneSpec { seed, num_lanes: lanes, events, ..SceneSpec::default() }
    }

    fn fork_at(position_m: f64) -> EventSpec {
        EventSpec { kind: EventKind::Fork, longitudinal_position_m: position_m, ramp_length_m: 80.0 }
    }

    fn merge_at(position_m: f64) -> EventSpec {
        EventSpec {
            kind: EventKind::Merge,
            longitudinal_position_m: position_m,
            ramp_length_m: 80.0,
        }
    }

    /// Bright-run centers in one raster column.
    fn stroke_centers(raster: &IntensityRaster, col: usize) -> Vec<f64> {
        let mut centers = Vec::new();
        let mut run: Option<(usize, usize)> = None;
        for row in 0..raster.height() {
            if *raster.grid().get(col, row) >= 0.8 {
                run = Some(match run {
                    None => (row, row),
                    Some((start, _)) => (start, row),
                });
            } else if let Some((start, end)) = run.take() {
                centers.push((start + end) as f64 / 2.0);
            }
        }
        if let Some((start, end)) = run {
            centers.push((start + end) as f64 / 2.0);
        }
        centers
    }

    #[test]
    fn plain_scene_renders_evenly_spaced_boundaries() {
        let scene = generate(&spec(7, 3, vec![])).unwrap();
        assert_eq!(scene.raster.width(), 8000, "400 m at 5 cm per pixel");
        assert!(scene.gt_dag.validate().is_empty());
        assert_eq!(scene.gt_polylines.len(), 4);
        let centers = stroke_centers(&scene.raster, 4000);
        assert_eq!(centers.len(), 4, "one stroke per boundary");
        for pair in centers.windows(2) {
            assert!(
                (pair[1] - pair[0] - 74.0).abs() <= 1.0,
                "3.7 m lanes are 74 px apart, got {}",
                pair[1] - pair[0]
            );
        }
    }

    #[test]
    fn noiseless_intensities_separate_boundary_from_background() {
        let scene = generate(&spec(3, 2, vec![])).unwrap();
        for poly in &scene.gt_polylines {
            for p in crate::geom::densify(poly, 1.0).unwrap().points() {
                let v = *scene.raster.grid().get(p.x.round() as usize, p.y.round() as usize);
                assert!(v >= 0.8, "boundary pixel at ({}, {}) reads {v}", p.x, p.y);
            }
        }
        let corners =
            [(0, 0), (scene.raster.width() - 1, 0), (0, scene.raster.height() - 1)];
        for (x, y) in corners {
            assert!(*scene.raster.grid().get(x, y) <= 0.1, "background corner too bright");
        }
    }

    #[test]
    fn boundary_curvature_stays_gentle() {
        // Second difference of each boundary row, in radians-per-pixel terms:
        // the tracer's window geometry assumes nearly straight local ridges.
        let scene = generate(&spec(11, 2, vec![fork_at(150.0)])).unwrap();
        for poly in &scene.gt_polylines {
            let dense = crate::geom::densify(poly, 1.0).unwrap();
            let pts = dense.points();
            for w in pts.windows(3) {
                let turn = (w[2].y - w[1].y) - (w[1].y - w[0].y);
                assert!(turn.abs() < 0.02, "curvature {turn} exceeds the budget");
            }
        }
    }

    #[test]
    fn fork_event_splits_the_outermost_boundary() {
        let scene = generate(&spec(5, 2, vec![fork_at(150.0)])).unwrap();
        let dag = &scene.gt_dag;
        assert!(dag.validate().is_empty());
        assert_eq!(dag.count_state(VertexState::Fork), 1);
        assert_eq!(dag.count_state(VertexState::Terminate), 0);
        let fork = dag.iter().find(|v| v.state == VertexState::Fork).unwrap();
        assert_eq!(fork.children.len(), 2);
        assert!((fork.position.x - 3000.0).abs() < 1e-9, "fork vertex sits at 150 m");
        assert_eq!(scene.gt_polylines.len(), 4, "three founders plus the born boundary");
        // Past the ramp the born boundary runs a full lane below its parent.
        let centers = stroke_centers(&scene.raster, 7000);
        assert_eq!(centers.len(), 4);
        assert!((centers[3] - centers[2] - 74.0).abs() <= 1.0);
    }

    #[test]
    fn merge_event_terminates_the_outermost_boundary() {
        let scene = generate(&spec(9, 3, vec![merge_at(200.0)])).unwrap();
        let dag = &scene.gt_dag;
        assert!(dag.validate().is_empty());
        assert_eq!(dag.count_state(VertexState::Fork), 0);
        assert_eq!(dag.count_state(VertexState::Terminate), 1);
        let stop = dag.iter().find(|v| v.state == VertexState::Terminate).unwrap();
        assert!(stop.children.is_empty());
        // The contact point: ramp start 200 m + ramp 80 m = 280 m = 5600 px,
        // landing exactly on the boundary above.
        assert!((stop.position.x - 5600.0).abs() < 1e-9);
        let survivor_y = {
            let survivor = 2; // founder index above the dying outermost
            let x = stop.position.x;
            let others: Vec<f64> = scene
                .gt_polylines
                .iter()
                .map(|p| {
                    p.points()
                        .iter()
                        .map(|q| ((q.x - x).abs(), q.y))
                        .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
                        .1
                })
                .collect();
            others[survivor]
        };
        assert!(
            (stop.position.y - survivor_y).abs() <= 1.0,
            "terminate vertex lands on the survivor"
        );
        // Three lanes start with four boundaries; the merge leaves three.
        assert_eq!(stroke_centers(&scene.raster, 1000).len(), 4);
        assert_eq!(stroke_centers(&scene.raster, 7000).len(), 3);
    }

    #[test]
    fn fork_then_merge_returns_to_the_original_lane_count() {
        let scene =
            generate(&spec(13, 2, vec![fork_at(100.0), merge_at(250.0)])).unwrap();
        assert!(scene.gt_dag.validate().is_empty());
        assert_eq!(scene.gt_dag.count_state(VertexState::Fork), 1);
        assert_eq!(scene.gt_dag.count_state(VertexState::Terminate), 1);
        assert_eq!(stroke_centers(&scene.raster, 400).len(), 3);
        assert_eq!(stroke_centers(&scene.raster, 4500).len(), 4);
        assert_eq!(stroke_centers(&scene.raster, 7600).len(), 3);
    }

    #[test]
    fn generation_is_bit_identical_for_equal_specs() {
        let s = SceneSpec {
            noise: NoiseSpec { gaussian_sigma: 0.05, dropout_prob: 0.01 },
            ..spec(42, 3, vec![fork_at(120.0)])
        };
        let a = generate(&s).unwrap();
        let b = generate(&s).unwrap();
        assert_eq!(a.raster.grid().raw(), b.raster.grid().raw());
        let ja = deterministic_json(&to_json_value(&a.gt_dag)).unwrap();
        let jb = deterministic_json(&to_json_value(&b.gt_dag)).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn noise_stays_clamped_and_leaves_geometry_alone() {
        let clean = generate(&spec(21, 2, vec![])).unwrap();
        let noisy = generate(&SceneSpec {
            noise: NoiseSpec { gaussian_sigma: 0.08, dropout_prob: 0.02 },
            ..spec(21, 2, vec![])
        })
        .unwrap();
        assert!(noisy.raster.grid().raw().iter().all(|v| (0.0..=1.0).contains(v)));
        let ja = deterministic_json(&to_json_value(&clean.gt_dag)).unwrap();
        let jb = deterministic_json(&to_json_value(&noisy.gt_dag)).unwrap();
        assert_eq!(ja, jb, "noise must not move the ground truth");
    }

    #[test]
    fn infeasible_event_lists_name_the_offender() {
        let unsorted = spec(1, 2, vec![fork_at(200.0), fork_at(100.0)]);
        let overlapping = spec(1, 2, vec![fork_at(100.0), merge_at(150.0)]);
        let lane_starved = spec(1, 2, vec![merge_at(100.0), merge_at(200.0)]);
        let off_scene = spec(1, 2, vec![fork_at(390.0)]);
        for (s, bad_index) in
            [(unsorted, 1), (overlapping, 1), (lane_starved, 1), (off_scene, 0)]
        {
            match generate(&s) {
                Err(Error::InfeasibleEvent { index, .. }) => assert_eq!(index, bad_index),
                other => panic!("expected an event error, got {other:?}"),
            }
        }
    }

    #[test]
    fn scene_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let scene = generate(&spec(17, 2, vec![fork_at(150.0)])).unwrap();
        scene_to_disk(&scene, dir.path()).unwrap();
        let loaded = scene_from_disk(dir.path()).unwrap();
        assert_eq!(loaded.raster.width(), scene.raster.width());
        for (a, b) in loaded.raster.grid().raw().iter().zip(scene.raster.grid().raw()) {
            assert!((a - b).abs() <= 1.0 / 65_535.0, "quantization bound exceeded");
        }
        let ja = deterministic_json(&to_json_value(&scene.gt_dag)).unwrap();
        let jb = deterministic_json(&to_json_value(&loaded.gt_dag)).unwrap();
        assert_eq!(ja, jb);
        assert_eq!(loaded.gt_polylines.len(), scene.gt_polylines.len());

        let manifest = read_json(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(manifest["files"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn missing_directory_errors_name_the_path() {
        let scene = generate(&spec(2, 2, vec![])).unwrap();
        let missing = Path::new("/nonexistent/scene/dir");
        match scene_to_disk(&scene, missing) {
            Err(Error::Io { path, .. }) => assert!(path.starts_with("/nonexistent")),
            other => panic!("expected an I/O error, got {other:?}"),
        }
    }
}
