//! The three local predictors that drive greedy graph discovery.
//!
//! Tracing consumes a direction, a position, and a topology-state
//! distribution at every step, each conditioned on the previous vertex and
//! the distance field. This module ships a deterministic oracle that reads
//! those distributions straight out of the field:
//!
//! * **direction** — scores a fan of candidate headings by the mean field
//!   value along a ray of one step length and normalizes the scores into a
//!   distribution;
//! * **position** — crops a rotated window one step ahead, forms a softmax
//!   over its cells (field value times a centered dead-reckoning prior;
//!   cells off the image or too close to traced corridors are excluded),
//!   and returns the argmax cell center;
//! * **state** — skeletonizes the binarized window and classifies the local
//!   ridge topology: a bifurcation ahead means `Fork`, convergence onto a
//!   pixel corridor traced by another chain (or a genuine mid-image ridge
//!   end) means `Terminate`, anything else `Normal`.
//!
//! The predictors are pure functions of a [`HeaderContext`]; identical
//! contexts produce identical outputs, which is what makes whole-graph
//! scoring by replay (see [`crate::inference::dag_log_score`]) possible. The
//! interface is the seam where learned models could replace the oracle
//! without touching the discovery loop.

use serde::{Deserialize, Serialize};

use crate::claims::ClaimGrid;
use crate::dag::VertexState;
use crate::error::{Error, Result};
use crate::geom::{bilinear_at, sample_bilinear, Angle, Point, RotatedRoi};
use crate::raster::{binarize_grid, skeletonize, BinaryMask, DistanceField};

/// Field threshold for the state header's ridge analysis. Keeps only cells
/// within ~4 px of a boundary (field 8 on the boundary, minus 1/4 per pixel
/// of distance), so two lanes a lane-width apart never blend while a fork's
/// two arms stay joined until they genuinely separate.
const STATE_BINARIZE_THRESHOLD: f64 = 7.0;

/// Skeleton pixels closer than this to another chain's corridor are dropped
/// from the state analysis: an already-traced neighbor must read as "not my
/// ridge", otherwise every merge would look like a fork.
const CLAIM_DROP_RADIUS_PX: f64 = 4.0;

/// A ridge whose forward extremity comes this close to the image border is
/// leaving the image, not ending — the chain keeps its `Normal` state and
/// runs up to the border instead of terminating early. Generous because
/// thinning erodes up to half the ridge-band thickness off a clipped tip.
const BORDER_MARGIN_PX: f64 = 8.0;

/// Depth (columns) of the bands in which ridge-arm crossings are counted.
/// Several columns deep so that a one-pixel dropout notch in a ridge cannot
/// zero the count and each arm has enough support to register as a distinct
/// run.
const EDGE_BAND_COLS: usize = 8;

/// Forward overhang (columns) added to the state window before binarizing
/// and thinning. Thinning erodes a clipped ridge tip back by up to half the
/// blob thickness — nearly 10 px where two converging boundaries have fused
/// into one blob — so the window is sampled that much past its scored
/// extent and the erosion lands in the overhang instead of wiping the far
/// edge band. Where the *image* ends the overhang reads zeros and the tip
/// still retreats, which is exactly the case [`BORDER_MARGIN_PX`] covers.
const STATE_PAD_COLS: usize = 16;

/// Minimum mean field value for a candidate heading to count as a plausible
/// continuation: half the on-boundary value. A ray tracking a boundary band
/// averages near 8; a ray merely *crossing* the road toward some other
/// boundary averages well under 4. Without this gate a chain that runs out
/// of image would happily turn 90° onto the residual cross-road evidence
/// instead of losing track at the border.
const DIRECTION_MIN_SCORE: f64 = crate::raster::FIELD_BOUNDARY_VALUE / 2.0;

/// Softening applied to the state header's hard decision so that all three
/// log-probabilities are finite: the winner gets `1 − 2ε`, the others `ε`.
const STATE_EPSILON: f64 = 1e-6;

/// Half-width of the keep-out strip around the first arm when placing the
/// second arm of a fork: cells this close to the first arm's claimed path —
/// or to the straight ray it departed along, which stands in for the path
/// when that arm stopped short — are excluded. Wide enough that no cell
/// *inside* the first arm's ridge core (field ≥ ~6.5) survives to outscore
/// the second arm's on-ridge cells, which sit a dozen pixels off-axis and
/// pay the dead-reckoning prior for it; narrow enough that the second arm
/// of even a freshly-fired gradual fork (≥ ~10 px off the ray one step out)
/// is never touched.
const CONSUMED_RAY_EXCLUSION_PX: f64 = 6.0;

/// Tuning knobs shared by the three predictors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeaderConfig {
    /// Step length in pixels between consecutive vertices.
    pub step_px: f64,
    /// Window height (across-track extent) in cells.
    pub roi_h: usize,
    /// Window width (along-track extent) in cells.
    pub roi_w: usize,
    /// Number of candidate headings scored by the direction predictor.
    pub angle_samples: usize,
    /// Half-width (radians) of the exclusion band around the already-consumed
    /// branch when expanding the second arm of a fork.
    pub fork_sep_min_rad: f64,
    /// Contact radius (pixels) for the merge test.
    pub merge_radius_px: f64,
}

impl Default for HeaderConfig {
    fn default() -> Self {
        HeaderConfig {
            step_px: 50.0,
            roi_h: 100,
            roi_w: 100,
            angle_samples: 181,
            fork_sep_min_rad: 0.05,
            merge_radius_px: 10.0,
        }
    }
}

impl HeaderConfig {
    /// Checks the structural constraints the predictors rely on.
    pub fn validate(&self) -> Result<()> {
        if !(self.step_px > 0.0) {
            return Err(Error::parameter("step_px", "must be positive"));
        }
        let min_roi = self.roi_h.min(self.roi_w);
        if min_roi < 1 {
            return Err(Error::parameter("roi_h/roi_w", "must be at least 1 cell"));
        }
        if self.step_px >= min_roi as f64 {
            return Err(Error::parameter(
                "step_px",
                "must be smaller than the window extent, or every step outruns its evidence",
            ));
        }
        if self.angle_samples < 3 {
            return Err(Error::parameter("angle_samples", "need at least 3 candidate headings"));
        }
        if self.fork_sep_min_rad < 0.0 {
            return Err(Error::parameter("fork_sep_min_rad", "must be non-negative"));
        }
        if !(self.merge_radius_px > 0.0) {
            return Err(Error::parameter("merge_radius_px", "must be positive"));
        }
        Ok(())
    }
}

/// Everything a single prediction is conditioned on.
#[derive(Clone, Copy)]
pub struct HeaderContext<'a> {
    /// The distance field evidence.
    pub field: &'a DistanceField,
    /// Pixels already traced by this and other chains.
    pub claimed: &'a ClaimGrid,
    /// Position of the vertex being extended.
    pub parent_position: Point,
    /// Heading along which the parent was reached (for roots: the seed tangent).
    pub parent_angle: Angle,
    /// The parent's topology state.
    pub parent_state: VertexState,
    /// Whether the parent is an unexpanded root (widens the direction fan to
    /// a full circle, since a seed tangent may point either way).
    pub parent_is_root: bool,
    /// Id of the chain being extended (its own corridor does not count as
    /// "another boundary" in the merge test).
    pub boundary_id: u32,
    /// When expanding the second arm of a fork: the heading consumed by the
    /// first arm, to be excluded from the direction fan.
    pub consumed_branch: Option<Angle>,
    /// Whether a fork lies within one window length behind the parent along
    /// this chain; suppresses re-detecting the same bifurcation.
    pub fork_refractory: bool,
}

/// Non-error reasons a prediction can decline to extend the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSignal {
    /// Every candidate direction scored zero — the field holds no usable
    /// evidence around the parent.
    LostTrack,
    /// No admissible position cell remains (window off the image, or
    /// everything in reach already traced).
    ExitImage,
}

impl std::fmt::Display for TraceSignal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TraceSignal::LostTrack => f.write_str("lost track: no directional evidence"),
            TraceSignal::ExitImage => f.write_str("exit: no admissible position cell"),
        }
    }
}

/// Direction prediction: the winning heading and its log-probability under
/// the normalized ray scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionPrediction {
    pub angle: Angle,
    pub log_prob: f64,
}

/// Position prediction: the winning cell center in image coordinates and its
/// log-softmax value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionPrediction {
    pub position: Point,
    pub log_prob: f64,
}

/// State prediction: the winning state plus the full (softened one-hot)
/// log-distribution in the order `[Normal, Fork, Terminate]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePrediction {
    pub state: VertexState,
    pub log_probs: [f64; 3],
}

impl StatePrediction {
    /// Index of a state in the `log_probs` array.
    pub fn index_of(state: VertexState) -> usize {
        match state {
            VertexState::Normal => 0,
            VertexState::Fork => 1,
            VertexState::Terminate => 2,
        }
    }
}

/// The deterministic distance-field oracle implementing the three predictors.
#[derive(Debug, Clone)]
pub struct HeaderSuite {
    config: HeaderConfig,
}

impl HeaderSuite {
    /// Builds a suite after validating the configuration.
    pub fn new(config: HeaderConfig) -> Result<Self> {
        config.validate()?;
        Ok(HeaderSuite { config })
    }

    pub fn config(&self) -> &HeaderConfig {
        &self.config
    }

    /// The point one step ahead of the parent along `angle` — the anchor of
    /// the position/state window and the probe of the merge test.
    pub fn advanced_center(&self, ctx: &HeaderContext<'_>, angle: Angle) -> Point {
        let (c, s) = angle.direction();
        ctx.parent_position.offset(self.config.step_px * c, self.config.step_px * s)
    }

    // ───────────────────────── direction ─────────────────────────

    /// Candidate headings: a full circle for an unexpanded root (the seed
    /// tangent may point either way along the ridge), otherwise a half-circle
    /// fan centered on the parent heading.
    fn direction_candidates(&self, ctx: &HeaderContext<'_>) -> Vec<Angle> {
        let k = self.config.angle_samples;
        let base = ctx.parent_angle.radians();
        if ctx.parent_is_root {
            let step = std::f64::consts::TAU / k as f64;
            (0..k).map(|i| Angle::new(base + i as f64 * step)).collect()
        } else {
            let step = std::f64::consts::PI / (k - 1) as f64;
            (0..k)
                .map(|i| Angle::new(base - std::f64::consts::FRAC_PI_2 + i as f64 * step))
                .collect()
        }
    }

    /// Scores one heading: mean bilinear field value along a ray of one step
    /// length, sampled at unit spacing. Samples outside the image read 0.
    fn ray_score(&self, ctx: &HeaderContext<'_>, angle: Angle) -> f64 {
        let n = (self.config.step_px.floor() as usize).max(1);
        let (c, s) = angle.direction();
        let p = ctx.parent_position;
        let mut sum = 0.0;
        for t in 1..=n {
            let t = t as f64;
            sum += bilinear_at(ctx.field.grid(), p.x + t * c, p.y + t * s);
        }
        sum / n as f64
    }

    /// The candidate fan after removing the consumed-branch neighborhood
    /// (applies only when expanding the second arm of a fork) and every
    /// heading below the evidence gate [`DIRECTION_MIN_SCORE`], each
    /// surviving heading paired with its ray score.
    fn direction_scores(&self, ctx: &HeaderContext<'_>) -> Vec<(Angle, f64)> {
        let consumed = match (ctx.parent_state, ctx.consumed_branch) {
            (VertexState::Fork, Some(angle)) => Some(angle),
            _ => None,
        };
        self.direction_candidates(ctx)
            .into_iter()
            .filter(|angle| {
                consumed.is_none_or(|used| angle.separation(used) > self.config.fork_sep_min_rad)
            })
            .map(|angle| (angle, self.ray_score(ctx, angle)))
            .filter(|&(_, score)| score >= DIRECTION_MIN_SCORE)
            .collect()
    }

    /// Predicts the direction of the next vertex.
    ///
    /// The score of each candidate heading is the mean field value along its
    /// ray; the returned log-probability is against the sum over all
    /// candidates still in play. When expanding the second arm of a fork the
    /// neighborhood of the already-consumed heading (±`fork_sep_min_rad`) is
    /// removed from the candidate set before both the argmax and the
    /// normalization, and headings whose rays carry too little evidence are
    /// dropped the same way. Ties keep the first candidate in fan order; an
    /// empty surviving set means the track is lost (typically: the boundary
    /// left the image).
    pub fn predict_direction(
        &self,
        ctx: &HeaderContext<'_>,
    ) -> std::result::Result<DirectionPrediction, TraceSignal> {
        let scored = self.direction_scores(ctx);
        let total: f64 = scored.iter().map(|(_, s)| s).sum();
        let best = scored
            .into_iter()
            .reduce(|best, cand| if cand.1 > best.1 { cand } else { best });
        match best {
            Some((angle, score)) if score > 0.0 => {
                Ok(DirectionPrediction { angle, log_prob: (score / total).ln() })
            }
            _ => Err(TraceSignal::LostTrack),
        }
    }

    /// Log-probability the direction model assigns to a given heading —
    /// the evaluation counterpart of [`predict_direction`], used when
    /// re-scoring an existing graph. The heading is snapped to the nearest
    /// candidate of the fan (exact for graphs produced by discovery, which
    /// only ever stores fan headings). Zero evidence yields `-inf`.
    ///
    /// [`predict_direction`]: HeaderSuite::predict_direction
    pub fn direction_log_prob(&self, ctx: &HeaderContext<'_>, heading: Angle) -> f64 {
        let scored = self.direction_scores(ctx);
        let total: f64 = scored.iter().map(|(_, s)| s).sum();
        let nearest = scored
            .into_iter()
            .reduce(|best, cand| if cand.0.separation(heading) < best.0.separation(heading) { cand } else { best });
        match nearest {
            Some((_, score)) if score > 0.0 && total > 0.0 => (score / total).ln(),
            _ => f64::NEG_INFINITY,
        }
    }

    // ───────────────────────── position ─────────────────────────

    /// The rotated window one step ahead of the parent, oriented along the
    /// predicted direction. Shared by the position and state predictors.
    fn window(&self, ctx: &HeaderContext<'_>, angle: Angle) -> RotatedRoi {
        RotatedRoi::new(self.advanced_center(ctx, angle), angle, self.config.roi_h, self.config.roi_w)
            .expect("validated config implies a well-formed window")
    }

    /// Scores every cell of the window: the bilinear field value weighted by
    /// a centered Gaussian prior, or `-inf` for excluded cells.
    ///
    /// The prior encodes dead reckoning — the next vertex lives near the
    /// window center, one step along the predicted direction. Without it the
    /// raw argmax is decided by sub-pixel sampling luck: a cell landing
    /// dead-on a *different* boundary forty pixels off-axis interpolates to
    /// a higher value than a cell half a pixel off the chain's own ridge,
    /// and the trace jumps tracks. The weight is multiplicative, so scaling
    /// the field still cancels out of the argmax.
    ///
    /// Cells whose centers fall off the image are excluded, as are cells
    /// inside the dilated corridor of already-traced chains — without that
    /// exclusion the argmax would happily sit a fraction of a pixel ahead of
    /// the previous vertex forever. When expanding the second arm of a fork
    /// the blanket exclusion relaxes (the new arm legitimately starts right
    /// next to the first arm's fresh trail) and is replaced by a
    /// [`CONSUMED_RAY_EXCLUSION_PX`] keep-out strip around the first arm —
    /// both its actual claimed path and the straight ray it departed along,
    /// which still covers the heading when the first arm stopped short. A
    /// gradual fork's arms are angularly indistinguishable at birth, and
    /// without the strip the ridge the first arm follows (or the flanks of
    /// its halo, when the second arm sits further off-axis) would outscore
    /// the true second arm under the dead-reckoning prior, leaving the new
    /// chain stranded beside a boundary that is already owned.
    fn scored_window(&self, ctx: &HeaderContext<'_>, roi: &RotatedRoi) -> crate::grid::Grid<f64> {
        let mut crop = sample_bilinear(ctx.field.grid(), roi);
        let corridor_only = ctx.parent_state == VertexState::Fork && ctx.consumed_branch.is_some();
        let consumed_ray = ctx.consumed_branch.filter(|_| corridor_only).map(|used| {
            let (c, s) = used.direction();
            let reach = self.config.step_px + self.config.roi_w as f64;
            (ctx.parent_position, ctx.parent_position.offset(reach * c, reach * s))
        });
        let center_row = (self.config.roi_h as f64 - 1.0) / 2.0;
        let center_col = (self.config.roi_w as f64 - 1.0) / 2.0;
        let two_sigma_sq = 2.0 * (self.config.step_px / 2.0).powi(2);
        for row in 0..self.config.roi_h {
            for col in 0..self.config.roi_w {
                let global = roi.cell_position(row, col);
                let (px, py) = (global.x.round() as i64, global.y.round() as i64);
                let admissible = ctx.field.contains(px, py)
                    && if corridor_only {
                        ctx.claimed.owner(px, py) == 0
                            && ctx
                                .claimed
                                .nearest_other_claim(global, CONSUMED_RAY_EXCLUSION_PX, ctx.boundary_id)
                                .is_none()
                            && consumed_ray.is_none_or(|(a, b)| {
                                crate::geom::point_segment_distance(global, a, b)
                                    > CONSUMED_RAY_EXCLUSION_PX
                            })
                    } else {
                        !ctx.claimed.is_blocked(px, py)
                    };
                let cell = crop.get_mut(col, row);
                if admissible {
                    let d2 =
                        (row as f64 - center_row).powi(2) + (col as f64 - center_col).powi(2);
                    *cell *= (-d2 / two_sigma_sq).exp();
                } else {
                    *cell = f64::NEG_INFINITY;
                }
            }
        }
        crop
    }

    /// log-softmax normalizer of a scored window (`-inf` cells contribute 0).
    fn window_logsumexp(scores: &crate::grid::Grid<f64>) -> f64 {
        let max = scores.raw().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        max + scores.raw().iter().filter(|s| s.is_finite()).map(|s| (s - max).exp()).sum::<f64>().ln()
    }

    /// Predicts the position of the next vertex.
    ///
    /// Softmax (temperature 1) over the admissible cells of the window one
    /// step ahead, each scored by field value times the centered prior (see
    /// [`scored_window`] for the weighting and exclusion rules). Score ties
    /// resolve to the cell nearest the window center, then to the smallest
    /// `(row, col)`.
    ///
    /// [`scored_window`]: HeaderSuite::scored_window
    pub fn predict_position(
        &self,
        ctx: &HeaderContext<'_>,
        angle: Angle,
    ) -> std::result::Result<PositionPrediction, TraceSignal> {
        let roi = self.window(ctx, angle);
        let scores = self.scored_window(ctx, &roi);
        let center_row = (self.config.roi_h as f64 - 1.0) / 2.0;
        let center_col = (self.config.roi_w as f64 - 1.0) / 2.0;

        let mut best: Option<(f64, f64, usize, usize)> = None; // score, d², row, col
        for row in 0..self.config.roi_h {
            for col in 0..self.config.roi_w {
                let score = *scores.get(col, row);
                if score == f64::NEG_INFINITY {
                    continue;
                }
                let d2 = (row as f64 - center_row).powi(2) + (col as f64 - center_col).powi(2);
                let wins = match best {
                    None => true,
                    Some((bs, bd2, brow, bcol)) => {
                        score > bs
                            || (score == bs
                                && (d2 < bd2 || (d2 == bd2 && (row, col) < (brow, bcol))))
                    }
                };
                if wins {
                    best = Some((score, d2, row, col));
                }
            }
        }
        let Some((score, _, row, col)) = best else {
            return Err(TraceSignal::ExitImage);
        };
        Ok(PositionPrediction {
            position: roi.cell_position(row, col),
            log_prob: score - Self::window_logsumexp(&scores),
        })
    }

    /// Log-probability the position model assigns to a given point — the
    /// evaluation counterpart of [`predict_position`], used when re-scoring
    /// an existing graph. The point is mapped to its containing window cell
    /// (exact for discovery output, which stores cell centers); points
    /// outside the window or on excluded cells have probability zero.
    ///
    /// [`predict_position`]: HeaderSuite::predict_position
    pub fn position_log_prob(&self, ctx: &HeaderContext<'_>, angle: Angle, position: Point) -> f64 {
        let roi = self.window(ctx, angle);
        // Invert the cell transform: rotate the offset from the window
        // center back into window coordinates, then round to a cell.
        let (c, s) = angle.direction();
        let center = self.advanced_center(ctx, angle);
        let (dx, dy) = (position.x - center.x, position.y - center.y);
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        let col = (u + (self.config.roi_w as f64 - 1.0) / 2.0).round();
        let row = (v + (self.config.roi_h as f64 - 1.0) / 2.0).round();
        if col < 0.0 || row < 0.0 || col >= self.config.roi_w as f64 || row >= self.config.roi_h as f64
        {
            return f64::NEG_INFINITY;
        }
        let scores = self.scored_window(ctx, &roi);
        let score = *scores.get(col as usize, row as usize);
        if score == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        score - Self::window_logsumexp(&scores)
    }

    // ───────────────────────── state ─────────────────────────

    /// Predicts the topology state at the next vertex.
    ///
    /// Decision layers, in order:
    /// 1. **merge** — the advanced center sits within `merge_radius_px` of a
    ///    corridor traced by another chain *and* is closer to it than the
    ///    parent is (pure convergence; a fork's second arm is born on top of
    ///    the first arm's corridor and moves away, so it never trips this) →
    ///    `Terminate`;
    /// 2. **ridge topology** — binarize and thin the window (sampled with a
    ///    forward overhang so the thinning pass erodes a clipped tip outside
    ///    the scored columns, never inside the far band), drop skeleton
    ///    pixels hugging other chains' corridors, flood the component
    ///    nearest the window entry (the chain's own ridge), and examine the
    ///    edge bands:
    ///    the own ridge never reaches the far band and genuinely ends
    ///    mid-image → `Terminate` (at the image border the chain runs out
    ///    by exhaustion instead and stays `Normal`);
    ///    the own ridge crosses the far band in **two distinct runs** while
    ///    entering the window as a **single blob**, with no recent fork
    ///    behind (`fork_refractory`) → `Fork` — one ridge behind, two ahead
    ///    is a bifurcation; an unclaimed *converging* neighbor shows the
    ///    mirror image (two blobs behind, one pinch ahead), so whichever
    ///    way the thinning artifacts inside the pinch land, it can never
    ///    read as a fork (and once a fork's arms fully separate, the
    ///    sibling arm stops being connected to the chain's own ridge and
    ///    drops out of the count);
    ///    anything else → `Normal`.
    ///
    /// The returned distribution is the hard decision softened by ε so all
    /// three log-probabilities stay finite.
    pub fn predict_state(&self, ctx: &HeaderContext<'_>, angle: Angle) -> StatePrediction {
        let state = self.decide_state(ctx, angle);
        let mut log_probs = [STATE_EPSILON.ln(); 3];
        log_probs[StatePrediction::index_of(state)] = (1.0 - 2.0 * STATE_EPSILON).ln();
        StatePrediction { state, log_probs }
    }

    fn decide_state(&self, ctx: &HeaderContext<'_>, angle: Angle) -> VertexState {
        let center = self.advanced_center(ctx, angle);
        let radius = self.config.merge_radius_px;
        let d_center = ctx.claimed.nearest_other_claim(center, radius, ctx.boundary_id);
        let d_parent = ctx.claimed.nearest_other_claim(ctx.parent_position, radius, ctx.boundary_id);
        let merging = match (d_center, d_parent) {
            (Some(dc), Some(dp)) => dc < dp,
            (Some(_), None) => true,
            _ => false,
        };
        if merging {
            return VertexState::Terminate;
        }

        // The window is sampled STATE_PAD_COLS past its scored extent; all
        // column arithmetic below still runs against the scored roi_w.
        let (dir_c, dir_s) = angle.direction();
        let overhang = STATE_PAD_COLS as f64 / 2.0;
        let full_w = self.config.roi_w + STATE_PAD_COLS;
        let roi = RotatedRoi::new(
            center.offset(overhang * dir_c, overhang * dir_s),
            angle,
            self.config.roi_h,
            full_w,
        )
        .expect("validated config implies a well-formed window");
        let crop = sample_bilinear(ctx.field.grid(), &roi);
        let mask = binarize_grid(&crop, STATE_BINARIZE_THRESHOLD)
            .expect("state threshold is a valid field value");
        let skeleton = skeletonize(&mask);

        // Keep only skeleton pixels that are not explained by another chain.
        let mut surviving = BinaryMask::empty(full_w, self.config.roi_h);
        for (col, row) in skeleton.iter_set() {
            let global = roi.cell_position(row, col);
            if ctx
                .claimed
                .nearest_other_claim(global, CLAIM_DROP_RADIUS_PX, ctx.boundary_id)
                .is_none()
            {
                surviving.set(col as i64, row as i64);
            }
        }

        // The chain's own ridge: the surviving component nearest the window
        // entry (the parent sits half a cell before local column 0, on the
        // center row).
        let entry_row = (self.config.roi_h as f64 - 1.0) / 2.0;
        let mut entry: Option<(f64, usize, usize)> = None;
        for (col, row) in surviving.iter_set() {
            let d2 = (row as f64 - entry_row).powi(2) + (col as f64 + 0.5).powi(2);
            let candidate = (d2, row, col);
            if entry.is_none_or(|cur| candidate < cur) {
                entry = Some(candidate);
            }
        }
        let Some((_, seed_row, seed_col)) = entry else {
            // No unexplained ridge anywhere in the window.
            return VertexState::Terminate;
        };
        let own = flood_component(&surviving, seed_col, seed_row, JUNCTION_HEAL_PX);

        let far_lo = self.config.roi_w.saturating_sub(EDGE_BAND_COLS);
        let far_hi = self.config.roi_w - 1;
        let far_runs =
            band_components(&own, far_lo, far_hi).into_values().max().unwrap_or(0);
        if far_runs == 0 {
            return if self.ridge_reaches_border(ctx, &roi, &own) {
                VertexState::Normal
            } else {
                VertexState::Terminate
            };
        }
        // Distinct binarized blobs of the *near* band that carry own-ridge
        // pixels. A second one means the ridge next to ours is a converging
        // neighbor (still separate behind us), not a forking arm.
        let near_blobs = band_components(&mask, 0, EDGE_BAND_COLS.min(self.config.roi_w) - 1);
        let near_arms: std::collections::HashSet<usize> = own
            .iter_set()
            .filter(|&(col, _)| col < EDGE_BAND_COLS)
            .filter_map(|px| near_blobs.get(&px).copied())
            .collect();
        if far_runs >= 2 && near_arms.len() <= 1 && !ctx.fork_refractory {
            return VertexState::Fork;
        }
        VertexState::Normal
    }

    /// Whether the forward extremity of the chain's ridge component is
    /// pressed against the image border (the boundary leaves the image there,
    /// it does not end).
    fn ridge_reaches_border(
        &self,
        ctx: &HeaderContext<'_>,
        roi: &RotatedRoi,
        own: &BinaryMask,
    ) -> bool {
        let last_col = own.iter_set().map(|(col, _)| col).max();
        let Some(last_col) = last_col else { return false };
        let w = ctx.field.width() as f64;
        let h = ctx.field.height() as f64;
        own.iter_set().filter(|&(col, _)| col + 1 >= last_col).any(|(col, row)| {
            let p = roi.cell_position(row, col);
            p.x < BORDER_MARGIN_PX
                || p.y < BORDER_MARGIN_PX
                || p.x > w - 1.0 - BORDER_MARGIN_PX
                || p.y > h - 1.0 - BORDER_MARGIN_PX
        })
    }
}

/// Connectivity reach (Chebyshev distance) of the own-ridge flood. 1 is
/// plain 8-connectivity; 2 also bridges the single-pixel breaks the thinning
/// pass is prone to leaving at Y-junctions, which would otherwise cut a
/// fork's arms off the trunk.
const JUNCTION_HEAL_PX: i64 = 2;

/// Floods the component of `mask` containing `(x, y)`, treating pixels
/// within Chebyshev distance `reach` as connected.
fn flood_component(mask: &BinaryMask, x: usize, y: usize, reach: i64) -> BinaryMask {
    let mut out = BinaryMask::empty(mask.width(), mask.height());
    let mut stack = vec![(x as i64, y as i64)];
    out.set(x as i64, y as i64);
    while let Some((cx, cy)) = stack.pop() {
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (nx, ny) = (cx + dx, cy + dy);
                if mask.is_set(nx, ny) && !out.is_set(nx, ny) {
                    out.set(nx, ny);
                    stack.push((nx, ny));
                }
            }
        }
    }
    out
}

/// Labels the 8-connected components of the set pixels of `mask` whose
/// column lies in `[col_lo, col_hi]` — the distinct blobs crossing that
/// band, keyed by pixel.
fn band_components(
    mask: &BinaryMask,
    col_lo: usize,
    col_hi: usize,
) -> std::collections::HashMap<(usize, usize), usize> {
    let band: Vec<(usize, usize)> = mask
        .iter_set()
        .filter(|&(col, _)| col >= col_lo && col <= col_hi)
        .collect();
    let mut labels: std::collections::HashMap<(usize, usize), usize> = std::collections::HashMap::new();
    let mut blobs = 0;
    for &(col, row) in &band {
        if labels.contains_key(&(col, row)) {
            continue;
        }
        blobs += 1;
        let mut stack = vec![(col, row)];
        labels.insert((col, row), blobs);
        while let Some((cx, cy)) = stack.pop() {
            for &(nx, ny) in &band {
                if labels.contains_key(&(nx, ny)) {
                    continue;
                }
                if nx.abs_diff(cx) <= 1 && ny.abs_diff(cy) <= 1 {
                    labels.insert((nx, ny), blobs);
                    stack.push((nx, ny));
                }
            }
        }
    }
    labels
}
