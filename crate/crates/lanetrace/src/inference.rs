//! Greedy graph discovery: grow lane-boundary chains vertex by vertex,
//! branching at forks and stopping at merges, plus seed extraction and a
//! recovery pass for boundaries the first sweep missed.
//!
//! The driver is a plain work queue. It starts with the seed vertices
//! (skeleton endpoints near the entry edge, see [`initial_vertices`]); each
//! popped vertex is extended into a chain by repeatedly taking the argmax of
//! the three predictors — direction, then position, then topology state.
//! A `Fork` child goes back onto the queue so its second arm can be expanded
//! later (excluding the direction the first arm consumed); a `Terminate`
//! child closes the chain. Every accepted segment is stamped into a
//! [`ClaimGrid`] so later chains can detect convergence and keep off
//! already-traced corridors.
//!
//! Because every choice is an argmax over a deterministic predictor, a
//! finished graph can be *re-scored*: [`dag_log_score`] replays the
//! discovery walk purely from the stored structure, rebuilding the claim
//! grid stamp by stamp, and sums the log-probabilities the predictors assign
//! to the stored headings, positions, and states. The output of [`discover`]
//! therefore scores at least as high as any copy of itself with a single
//! vertex state relabeled — each state was the argmax at its moment of
//! creation, and relabeling can only lower the remaining terms.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::claims::ClaimGrid;
use crate::dag::{LaneDag, VertexState};
use crate::error::{Error, Result};
use crate::geom::{heading_between, Angle, Point};
use crate::headers::{HeaderContext, HeaderSuite, StatePrediction};
use crate::raster::{
    binarize, connected_components, exact_distance_transform, rasterize_polylines, skeletonize,
    skeleton_endpoints, BinaryMask, DistanceField,
};

/// Seeds closer than this to the left (entry) edge are always kept; farther
/// ones must point into the image to survive the entry filter.
const ENTRY_EDGE_PX: f64 = 200.0;

/// How many skeleton pixels to walk inward when estimating a seed's ridge
/// tangent.
const TANGENT_WALK_PX: usize = 10;

/// What to do when the direction predictor finds no evidence at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LostTrackPolicy {
    /// Close the chain as if it had terminated; vertices already appended
    /// keep their predicted states.
    #[default]
    Terminate,
}

/// Tuning knobs of the discovery loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferenceConfig {
    /// Hard cap on vertices appended per chain.
    pub max_steps_per_boundary: usize,
    /// Hard cap on vertices in the whole graph; hitting it sets the
    /// budget-exceeded flag on the result.
    pub max_total_vertices: usize,
    /// A field pixel within this distance of a traced polyline counts as
    /// covered during recovery.
    pub recovery_cover_radius_px: f64,
    /// Uncovered skeleton components smaller than this are noise, not missed
    /// boundaries.
    pub recovery_min_component_px: usize,
    /// Reaction to a lost-track signal from the direction predictor.
    pub lost_track_policy: LostTrackPolicy,
    /// Field threshold used when skeletonizing for seeds and recovery.
    pub binarize_threshold: f64,
    /// A predicted step must advance at least this far along its heading;
    /// shorter steps close the chain instead of appending (keeps border
    /// creep finite and prevents stationary loops).
    pub min_progress_px: f64,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            max_steps_per_boundary: 400,
            max_total_vertices: 20_000,
            recovery_cover_radius_px: 20.0,
            recovery_min_component_px: 40,
            lost_track_policy: LostTrackPolicy::Terminate,
            binarize_threshold: 4.0,
            min_progress_px: 2.0,
        }
    }
}

impl InferenceConfig {
    /// Checks that every knob is positive (and the threshold is a value the
    /// field can actually take).
    pub fn validate(&self) -> Result<()> {
        if self.max_steps_per_boundary == 0 {
            return Err(Error::parameter("max_steps_per_boundary", "must be positive"));
        }
        if self.max_total_vertices == 0 {
            return Err(Error::parameter("max_total_vertices", "must be positive"));
        }
        if !(self.recovery_cover_radius_px > 0.0) {
            return Err(Error::parameter("recovery_cover_radius_px", "must be positive"));
        }
        if self.recovery_min_component_px == 0 {
            return Err(Error::parameter("recovery_min_component_px", "must be positive"));
        }
        if !(self.binarize_threshold > 0.0) {
            return Err(Error::parameter("binarize_threshold", "must be positive"));
        }
        if !(self.min_progress_px > 0.0) {
            return Err(Error::parameter("min_progress_px", "must be positive"));
        }
        Ok(())
    }
}

/// A starting vertex for discovery: a position on a ridge and the ridge's
/// local tangent there. Seeds always carry the `Normal` state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seed {
    pub position: Point,
    pub angle: Angle,
    pub state: VertexState,
}

/// Result of a discovery or recovery run.
#[derive(Debug, Clone)]
pub struct Discovery {
    pub dag: LaneDag,
    /// True when `max_total_vertices` cut the run short; the graph is valid
    /// but partial.
    pub budget_exceeded: bool,
}

// ───────────────────────── seeding ─────────────────────────

/// Extracts starting vertices from the field: binarize, skeletonize, and
/// take the skeleton endpoints, each with the local ridge tangent as its
/// initial heading.
///
/// Boundaries enter the image from the left edge, so endpoints within
/// [`ENTRY_EDGE_PX`] of it are always kept; an endpoint farther right
/// survives only if its tangent points into the image (positive x) —
/// otherwise it is the *far* end of a boundary that some entry-edge seed
/// already covers. Seeds are ordered by `(y, x)`. An empty field yields an
/// empty list (the caller can still run recovery).
pub fn initial_vertices(field: &DistanceField, binarize_threshold: f64) -> Result<Vec<Seed>> {
    let mask = binarize(field, binarize_threshold)?;
    if mask.count_set() == 0 {
        return Ok(Vec::new());
    }
    let skeleton = skeletonize(&mask);
    let mut seeds: Vec<Seed> = skeleton_endpoints(&skeleton)
        .into_iter()
        .filter_map(|(x, y)| {
            let position = Point::new(x as f64, y as f64);
            let angle = ridge_tangent(&skeleton, (x, y));
            let points_inward = angle.direction().0 > 0.0;
            (position.x <= ENTRY_EDGE_PX || points_inward).then_some(Seed {
                position,
                angle,
                state: VertexState::Normal,
            })
        })
        .collect();
    seeds.sort_by(|a, b| {
        (a.position.y, a.position.x)
            .partial_cmp(&(b.position.y, b.position.x))
            .expect("seed coordinates are finite")
    });
    Ok(seeds)
}

/// Local ridge tangent at a skeleton endpoint: the heading from the endpoint
/// toward the pixel reached by walking [`TANGENT_WALK_PX`] steps inward
/// along the skeleton. An isolated pixel gets heading 0.
fn ridge_tangent(skeleton: &BinaryMask, start: (usize, usize)) -> Angle {
    let mut path: Vec<(i64, i64)> = vec![(start.0 as i64, start.1 as i64)];
    for _ in 0..TANGENT_WALK_PX {
        let &(cx, cy) = path.last().expect("path starts non-empty");
        let mut next = None;
        'scan: for dy in -1..=1i64 {
            for dx in -1..=1i64 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let cand = (cx + dx, cy + dy);
                if skeleton.is_set(cand.0, cand.1) && !path.contains(&cand) {
                    next = Some(cand);
                    break 'scan;
                }
            }
        }
        match next {
            Some(cand) => path.push(cand),
            None => break,
        }
    }
    let &(sx, sy) = path.first().expect("path starts non-empty");
    let &(ex, ey) = path.last().expect("path is non-empty");
    if (sx, sy) == (ex, ey) {
        return Angle::new(0.0);
    }
    heading_between(Point::new(sx as f64, sy as f64), Point::new(ex as f64, ey as f64))
        .expect("walk endpoints are distinct")
}

// ───────────────────────── discovery ─────────────────────────

/// Grows a lane-boundary graph from the given seeds.
///
/// Pops vertices from a FIFO queue and extends each into a chain: predict a
/// direction, predict a position one step along it, predict the new vertex's
/// topology state, append, stamp the segment. A `Fork` child is pushed onto
/// the queue and the chain continues through it (the second arm is expanded
/// when the fork is popped, with the first arm's heading excluded from the
/// direction fan). A `Terminate` child — or an exit/lost-track signal, a
/// sub-minimum step, or the per-chain cap — closes the chain. Fork vertices
/// that end up without exactly two children (border clips, budget cuts) are
/// demoted to `Normal` so the result always validates.
pub fn discover(
    field: &DistanceField,
    headers: &HeaderSuite,
    init: &[Seed],
    cfg: &InferenceConfig,
) -> Result<Discovery> {
    cfg.validate()?;
    for seed in init {
        if !field.contains(seed.position.x.round() as i64, seed.position.y.round() as i64) {
            return Err(Error::domain(format!(
                "seed at ({}, {}) lies outside the field",
                seed.position.x, seed.position.y
            )));
        }
    }
    let mut tracer = Tracer::new(field, headers, cfg, LaneDag::new(), 1);
    for seed in init {
        let id = tracer.dag.add_root(seed.position, seed.angle, seed.state);
        tracer.queue.push_back(id);
    }
    tracer.drain();
    Ok(tracer.finish())
}

/// Traces boundaries the existing graph missed.
///
/// Every field pixel within `recovery_cover_radius_px` of a traced polyline
/// counts as covered; skeleton components of the uncovered remainder with at
/// least `recovery_min_component_px` pixels are treated as missed boundaries
/// and traced from their endpoints, one seed at a time (a seed whose
/// surroundings were claimed by an earlier recovery chain — typically the
/// far endpoint of a component just traced end to end — is skipped). The
/// result is the union of the input graph and the new chains; once coverage
/// is complete the pass is a no-op.
pub fn recover(
    field: &DistanceField,
    headers: &HeaderSuite,
    dag: &LaneDag,
    cfg: &InferenceConfig,
) -> Result<Discovery> {
    cfg.validate()?;
    let (claims, next_chain) = walk_structure(dag, field, |_, _| {});
    let mut tracer = Tracer::new(field, headers, cfg, dag.clone(), next_chain);
    tracer.claims = claims;

    let covered_dist = {
        let polylines = dag.to_polylines();
        if polylines.is_empty() {
            None
        } else {
            let mask = rasterize_polylines(&polylines, field.width(), field.height())?;
            Some(exact_distance_transform(&mask)?)
        }
    };
    let skeleton = skeletonize(&binarize(field, cfg.binarize_threshold)?);
    let mut uncovered = BinaryMask::empty(field.width(), field.height());
    for (x, y) in skeleton.iter_set() {
        let covered = covered_dist
            .as_ref()
            .is_some_and(|d| *d.get(x, y) <= cfg.recovery_cover_radius_px);
        if !covered {
            uncovered.set(x as i64, y as i64);
        }
    }

    let (labels, label_count) = connected_components(&uncovered);
    let mut sizes = vec![0usize; label_count as usize + 1];
    for (x, y) in uncovered.iter_set() {
        sizes[*labels.get(x, y) as usize] += 1;
    }
    let mut seeds: Vec<Seed> = skeleton_endpoints(&uncovered)
        .into_iter()
        .filter(|&(x, y)| sizes[*labels.get(x, y) as usize] >= cfg.recovery_min_component_px)
        .map(|(x, y)| Seed {
            position: Point::new(x as f64, y as f64),
            angle: ridge_tangent(&uncovered, (x, y)),
            state: VertexState::Normal,
        })
        .collect();
    seeds.sort_by(|a, b| {
        (a.position.y, a.position.x)
            .partial_cmp(&(b.position.y, b.position.x))
            .expect("seed coordinates are finite")
    });

    for seed in seeds {
        let (sx, sy) = (seed.position.x.round() as i64, seed.position.y.round() as i64);
        if tracer.claims.is_blocked(sx, sy) {
            continue;
        }
        let id = tracer.dag.add_root(seed.position, seed.angle, seed.state);
        tracer.queue.push_back(id);
        tracer.drain();
    }
    Ok(tracer.finish())
}

/// Sequential chain growth over one image. The claim grid is mutated after
/// every appended vertex, so a single tracer must never be shared; tracing
/// different images in parallel is fine.
struct Tracer<'a> {
    field: &'a DistanceField,
    headers: &'a HeaderSuite,
    cfg: &'a InferenceConfig,
    dag: LaneDag,
    claims: ClaimGrid,
    queue: VecDeque<u32>,
    next_chain: u32,
    budget_exceeded: bool,
}

impl<'a> Tracer<'a> {
    fn new(
        field: &'a DistanceField,
        headers: &'a HeaderSuite,
        cfg: &'a InferenceConfig,
        dag: LaneDag,
        next_chain: u32,
    ) -> Self {
        Tracer {
            field,
            headers,
            cfg,
            dag,
            claims: ClaimGrid::new(field.width(), field.height()),
            queue: VecDeque::new(),
            next_chain,
            budget_exceeded: false,
        }
    }

    fn drain(&mut self) {
        while let Some(start) = self.queue.pop_front() {
            self.expand_chain(start);
        }
    }

    /// Extends one chain from `start`: a fresh seed root, or a popped fork
    /// whose second arm is still missing.
    fn expand_chain(&mut self, start: u32) {
        let chain = self.next_chain;
        self.next_chain += 1;
        let (start_pos, is_root, first_child) = {
            let v = self.dag.get(start).expect("queued vertices exist");
            (v.position, v.parent.is_none(), v.children.first().copied())
        };
        // A popped fork excludes the heading its first arm consumed. (A fork
        // that never got a first child — the chain closed immediately after
        // it — expands unconstrained and is demoted later.)
        let mut consumed = if is_root {
            self.claims.stamp_dot(start_pos, chain);
            None
        } else {
            first_child.map(|c| self.dag.get(c).expect("child ids are valid").heading)
        };

        let mut current = start;
        for _ in 0..self.cfg.max_steps_per_boundary {
            if self.dag.len() >= self.cfg.max_total_vertices {
                self.budget_exceeded = true;
                return;
            }
            let (parent_position, parent_angle, parent_state, parent_parent) = {
                let v = self.dag.get(current).expect("cursor stays inside the graph");
                (v.position, v.heading, v.state, v.parent)
            };
            let ctx = HeaderContext {
                field: self.field,
                claimed: &self.claims,
                parent_position,
                parent_angle,
                parent_state,
                parent_is_root: parent_parent.is_none(),
                boundary_id: chain,
                consumed_branch: consumed,
                fork_refractory: fork_refractory(&self.dag, self.refractory_px(), current),
            };
            // Lost track or no admissible cell: the chain closes, matching
            // the configured policy (the only one: terminate quietly).
            let Ok(direction) = self.headers.predict_direction(&ctx) else { return };
            let Ok(position) = self.headers.predict_position(&ctx, direction.angle) else {
                return;
            };
            let (dir_x, dir_y) = direction.angle.direction();
            let advance = (position.position.x - parent_position.x) * dir_x
                + (position.position.y - parent_position.y) * dir_y;
            if advance < self.cfg.min_progress_px {
                return;
            }
            let state = self.headers.predict_state(&ctx, direction.angle);
            let child =
                self.dag.add_child(current, position.position, direction.angle, state.state);
            self.claims.stamp_segment(parent_position, position.position, chain);
            match state.state {
                VertexState::Fork => self.queue.push_back(child),
                VertexState::Terminate => return,
                VertexState::Normal => {}
            }
            consumed = None;
            current = child;
        }
    }

    /// Path distance within which an upstream fork suppresses re-detection:
    /// one window length.
    fn refractory_px(&self) -> f64 {
        self.headers.config().roi_w as f64
    }

    fn finish(mut self) -> Discovery {
        // A fork is a promise of two arms; where a border clip, budget cut,
        // or blocked second arm broke the promise, the vertex is an ordinary
        // chain link.
        let demote: Vec<u32> = self
            .dag
            .iter()
            .filter(|v| v.state == VertexState::Fork && v.children.len() != 2)
            .map(|v| v.id)
            .collect();
        for id in demote {
            self.dag.set_state(id, VertexState::Normal);
        }
        debug_assert!(self.dag.validate().is_empty(), "discovery output must validate");
        Discovery { dag: self.dag, budget_exceeded: self.budget_exceeded }
    }
}

/// Whether `vertex` has a fork at or upstream of it within `limit_px` of
/// path distance — used to suppress re-detecting a bifurcation that is
/// still inside the analysis window.
fn fork_refractory(dag: &LaneDag, limit_px: f64, vertex: u32) -> bool {
    let mut current = vertex;
    let mut dist = 0.0;
    loop {
        let Some(v) = dag.get(current) else { return false };
        if v.state == VertexState::Fork {
            return true;
        }
        let Some(parent) = v.parent else { return false };
        let Some(p) = dag.get(parent) else { return false };
        dist += v.position.distance(p.position);
        if dist > limit_px {
            return false;
        }
        current = parent;
    }
}

// ───────────────────────── scoring ─────────────────────────

/// One scored step of a replayed graph: the log-probabilities the three
/// predictors assign to vertex `vertex`'s stored heading, position, and
/// state, conditioned on the same context discovery saw.
#[derive(Debug, Clone, Copy)]
pub struct StepScore {
    pub vertex: u32,
    pub stored_state: VertexState,
    pub direction: f64,
    pub position: f64,
    /// Full state log-distribution in `[Normal, Fork, Terminate]` order; the
    /// stored state's entry contributes to the total.
    pub state: [f64; 3],
}

impl StepScore {
    /// This step's contribution to the graph score.
    pub fn total(&self) -> f64 {
        self.direction + self.position + self.state[StatePrediction::index_of(self.stored_state)]
    }
}

/// Per-vertex breakdown of [`dag_log_score`].
#[derive(Debug, Clone)]
pub struct ScoreReport {
    pub total: f64,
    pub steps: Vec<StepScore>,
}

/// Joint log-probability of a graph under the header models: the sum over
/// all non-root vertices of the direction, position, and state
/// log-probabilities at their stored values.
///
/// The graph is replayed in discovery order — roots first, fork second arms
/// when popped — rebuilding the claim grid stamp by stamp, so each vertex is
/// scored against exactly the context discovery saw (for graphs discovery
/// produced, the score is the sum of the log-probabilities reported during
/// discovery). Roots are unconditioned and contribute nothing; an empty
/// graph scores 0. States or positions the model rules out score `-inf`
/// rather than erroring, which is what makes relabeled copies comparable.
pub fn dag_log_score(dag: &LaneDag, headers: &HeaderSuite, field: &DistanceField) -> Result<f64> {
    Ok(dag_log_score_report(dag, headers, field)?.total)
}

/// [`dag_log_score`] with the per-step breakdown exposed (used by the
/// greedy-certificate checks, which compare stored states against their
/// alternatives term by term).
pub fn dag_log_score_report(
    dag: &LaneDag,
    headers: &HeaderSuite,
    field: &DistanceField,
) -> Result<ScoreReport> {
    for v in dag.iter() {
        if !field.contains(v.position.x.round() as i64, v.position.y.round() as i64) {
            return Err(Error::domain(format!("vertex {} lies outside the field", v.id)));
        }
    }
    let refractory_px = headers.config().roi_w as f64;
    let mut steps = Vec::with_capacity(dag.len());
    walk_structure(dag, field, |step, claims| {
        let parent = dag.get(step.parent).expect("walk stays inside the graph");
        let child = dag.get(step.child).expect("walk stays inside the graph");
        let ctx = HeaderContext {
            field,
            claimed: claims,
            parent_position: parent.position,
            parent_angle: parent.heading,
            parent_state: parent.state,
            parent_is_root: parent.parent.is_none(),
            boundary_id: step.chain,
            consumed_branch: step.consumed,
            fork_refractory: fork_refractory(dag, refractory_px, step.parent),
        };
        steps.push(StepScore {
            vertex: child.id,
            stored_state: child.state,
            direction: headers.direction_log_prob(&ctx, child.heading),
            position: headers.position_log_prob(&ctx, child.heading, child.position),
            state: headers.predict_state(&ctx, child.heading).log_probs,
        });
    });
    let total = steps.iter().map(StepScore::total).sum();
    Ok(ScoreReport { total, steps })
}

/// One parent→child step of the structural replay.
struct ReplayStep {
    parent: u32,
    child: u32,
    /// Chain id under which the step's segment is stamped.
    chain: u32,
    /// First-arm heading excluded when this step opens a fork's second arm.
    consumed: Option<Angle>,
}

/// Replays a graph's construction purely from its structure, reproducing
/// discovery's chain order, chain ids, and claim stamps: roots in listed
/// order, then fork second arms FIFO as their forks are passed. `on_step`
/// sees each parent→child step *before* its segment is stamped — exactly
/// the claim state the predictors saw during discovery. Returns the final
/// claim grid and the next unused chain id.
///
/// Branching is keyed to structure (a two-child vertex walks `children[1]`
/// as a second arm), not to stored states, so copies with relabeled states
/// replay identically — the property the greedy certificate rests on.
fn walk_structure(
    dag: &LaneDag,
    field: &DistanceField,
    mut on_step: impl FnMut(&ReplayStep, &ClaimGrid),
) -> (ClaimGrid, u32) {
    let mut claims = ClaimGrid::new(field.width(), field.height());
    let mut queue: VecDeque<(u32, bool)> =
        dag.roots().iter().map(|&r| (r, true)).collect();
    let mut next_chain = 1u32;
    // Defensive bound: a structurally broken graph (cycle) must not hang.
    let mut remaining = dag.len().saturating_mul(2) + 16;
    while let Some((start, is_root)) = queue.pop_front() {
        let Some(start_vertex) = dag.get(start) else { continue };
        let chain = next_chain;
        next_chain += 1;
        let (mut consumed, mut next_child) = if is_root {
            claims.stamp_dot(start_vertex.position, chain);
            (None, start_vertex.children.first().copied())
        } else {
            let first_arm = start_vertex.children.first().and_then(|&c| dag.get(c));
            (first_arm.map(|v| v.heading), start_vertex.children.get(1).copied())
        };
        let mut current = start;
        while let Some(child_id) = next_child {
            let (Some(parent), Some(child)) = (dag.get(current), dag.get(child_id)) else {
                break;
            };
            if remaining == 0 {
                return (claims, next_chain);
            }
            remaining -= 1;
            on_step(&ReplayStep { parent: current, child: child_id, chain, consumed }, &claims);
            claims.stamp_segment(parent.position, child.position, chain);
            if child.children.len() >= 2 {
                queue.push_back((child_id, false));
            }
            consumed = None;
            current = child_id;
            next_child = child.children.first().copied();
        }
    }
    (claims, next_chain)
}
