//! Tracing quality metrics: pixel-threshold precision/recall/F1 and
//! topology correctness, aggregated across a batch of images.
//!
//! Precision at threshold `t` counts densified predicted points that land
//! within `t` pixels (exact point-to-segment distance) of any ground-truth
//! boundary, over the total number of predicted points; recall swaps the
//! roles. Aggregation sums the integer numerators and denominators across
//! images before dividing, so large images weigh proportionally to their
//! content and thread count cannot perturb the result.
//!
//! Topology correctness assigns every predicted polyline to the ground-truth
//! boundary it overlaps most (densified points within a fixed radius); a
//! boundary is topologically correct when exactly one prediction is assigned
//! to it — split traces, spurious extras, and missed boundaries all fail.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{densify, point_segment_distance, Point, Polyline};

/// Radius for the topology metric's point-in-boundary counts.
const TOPOLOGY_RADIUS_PX: f64 = 20.0;
/// Bucket edge length of the segment lookup grid.
const INDEX_CELL_PX: f64 = 16.0;

/// Evaluation knobs. `min_cover`, when set, additionally requires the one
/// assigned prediction to cover at least that fraction of the boundary's
/// densified points before the boundary counts as correct.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub thresholds_px: Vec<f64>,
    pub densify_spacing_px: f64,
    pub min_cover: Option<f64>,
    /// Worker threads for per-image terms (results are order-merged, so the
    /// count never changes the report).
    pub jobs: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            thresholds_px: vec![2.0, 3.0, 5.0, 10.0],
            densify_spacing_px: 1.0,
            min_cover: None,
            jobs: 1,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thresholds_px.is_empty() {
            return Err(Error::parameter("thresholds_px", "at least one threshold required"));
        }
        if self.thresholds_px.iter().any(|t| !(t > &0.0) || !t.is_finite()) {
            return Err(Error::parameter("thresholds_px", "thresholds must be positive"));
        }
        if !(self.densify_spacing_px > 0.0) {
            return Err(Error::parameter("densify_spacing_px", "must be positive"));
        }
        if let Some(c) = self.min_cover {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::parameter("min_cover", "must lie in [0, 1]"));
            }
        }
        if self.jobs == 0 {
            return Err(Error::parameter("jobs", "at least one worker required"));
        }
        Ok(())
    }
}

/// Precision/recall/F1 at one pixel threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdMetrics {
    pub threshold_px: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Batch-level topology outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TopologySummary {
    pub gt_count: usize,
    pub correct_count: usize,
    pub fraction: f64,
}

/// Same-threshold metrics restricted to a single image.
#[derive(Debug, Clone, Serialize)]
pub struct ImageMetrics {
    pub pred_points: usize,
    pub gt_points: usize,
    pub thresholds: Vec<ThresholdMetrics>,
}

/// The full evaluation result.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub thresholds: Vec<ThresholdMetrics>,
    pub topology: TopologySummary,
    pub per_image: Vec<ImageMetrics>,
    /// Set when the batch had no predicted points at all; the precision
    /// column is reported as zero rather than undefined.
    pub degenerate_precision: bool,
    /// Likewise for an empty ground-truth side.
    pub degenerate_recall: bool,
}

/// Per-image assignment of predicted polylines to ground-truth boundaries:
/// `assignments[p] = Some(g)` means prediction `p` overlaps boundary `g`
/// most; `None` means it overlaps nothing within the radius.
#[derive(Debug, Clone)]
pub struct TopologyOutcome {
    pub summary: TopologySummary,
    pub assignments: Vec<Vec<Option<usize>>>,
}

// ───────────────────── segment lookup grid ─────────────────────

/// Uniform-bucket index over the segments of a polyline set, for radius
/// queries during point-distance counting. Exact: a segment within `r` of a
/// query point overlaps the query's bucket range, so no candidate is missed.
struct SegmentIndex {
    /// (a, b, polyline id) per segment.
    segments: Vec<(Point, Point, usize)>,
    buckets: HashMap<(i64, i64), Vec<u32>>,
}

impl SegmentIndex {
    fn build(polylines: &[Polyline]) -> Self {
        let mut segments = Vec::new();
        let mut buckets: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (poly_id, poly) in polylines.iter().enumerate() {
            for (a, b) in poly.segments() {
                let id = segments.len() as u32;
                segments.push((a, b, poly_id));
                let (x0, x1) = (a.x.min(b.x), a.x.max(b.x));
                let (y0, y1) = (a.y.min(b.y), a.y.max(b.y));
                for cx in cell_of(x0)..=cell_of(x1) {
                    for cy in cell_of(y0)..=cell_of(y1) {
                        buckets.entry((cx, cy)).or_default().push(id);
                    }
                }
            }
        }
        SegmentIndex { segments, buckets }
    }

    /// Calls `visit(polyline id, distance)` for every indexed segment within
    /// `radius` of `p`. A polyline may be visited several times.
    fn for_each_within(&self, p: Point, radius: f64, mut visit: impl FnMut(usize, f64)) {
        for cx in cell_of(p.x - radius)..=cell_of(p.x + radius) {
            for cy in cell_of(p.y - radius)..=cell_of(p.y + radius) {
                let Some(ids) = self.buckets.get(&(cx, cy)) else { continue };
                for &id in ids {
                    let (a, b, poly) = self.segments[id as usize];
                    let d = point_segment_distance(p, a, b);
                    if d <= radius {
                        visit(poly, d);
                    }
                }
            }
        }
    }

    /// Smallest distance from `p` to any indexed segment, if one lies within
    /// `radius`.
    fn min_distance_within(&self, p: Point, radius: f64) -> Option<f64> {
        let mut best = f64::INFINITY;
        self.for_each_within(p, radius, |_, d| best = best.min(d));
        (best <= radius).then_some(best)
    }
}

fn cell_of(coord: f64) -> i64 {
    (coord / INDEX_CELL_PX).floor() as i64
}

// ───────────────────── per-image terms ─────────────────────

/// Integer counting terms for one image; summed across the batch before any
/// division happens.
struct ImageTerms {
    pred_points: usize,
    gt_points: usize,
    /// Predicted points within threshold `i` of the ground truth.
    pred_hits: Vec<usize>,
    /// Ground-truth points within threshold `i` of the predictions.
    gt_hits: Vec<usize>,
    assignments: Vec<Option<usize>>,
    gt_correct: Vec<bool>,
}

fn densified_points(polylines: &[Polyline], spacing: f64) -> Result<Vec<Vec<Point>>> {
    polylines
        .iter()
        .map(|p| Ok(densify(p, spacing)?.points().to_vec()))
        .collect()
}

fn image_terms(
    preds: &[Polyline],
    gts: &[Polyline],
    config: &EvalConfig,
) -> Result<ImageTerms> {
    let thresholds = &config.thresholds_px;
    let max_threshold =
        thresholds.iter().copied().fold(0.0f64, f64::max).max(TOPOLOGY_RADIUS_PX);
    let pred_samples = densified_points(preds, config.densify_spacing_px)?;
    let gt_samples = densified_points(gts, config.densify_spacing_px)?;
    let pred_index = SegmentIndex::build(preds);
    let gt_index = SegmentIndex::build(gts);

    let mut pred_hits = vec![0usize; thresholds.len()];
    let mut gt_hits = vec![0usize; thresholds.len()];
    // overlap[p][g]: densified points of prediction p within the topology
    // radius of ground-truth boundary g.
    let mut overlap = vec![vec![0usize; gts.len()]; preds.len()];

    let mut pred_points = 0;
    for (p, samples) in pred_samples.iter().enumerate() {
        pred_points += samples.len();
        for &point in samples {
            let mut per_poly_hit = vec![false; gts.len()];
            let mut nearest = f64::INFINITY;
            gt_index.for_each_within(point, max_threshold, |poly, d| {
                nearest = nearest.min(d);
                if d <= TOPOLOGY_RADIUS_PX {
                    per_poly_hit[poly] = true;
                }
            });
            for (slot, &t) in pred_hits.iter_mut().zip(thresholds) {
                if nearest <= t {
                    *slot += 1;
                }
            }
            for (g, hit) in per_poly_hit.into_iter().enumerate() {
                if hit {
                    overlap[p][g] += 1;
                }
            }
        }
    }

    let mut gt_points = 0;
    for samples in &gt_samples {
        gt_points += samples.len();
        for &point in samples {
            if let Some(d) = pred_index.min_distance_within(point, max_threshold) {
                for (slot, &t) in gt_hits.iter_mut().zip(thresholds) {
                    if d <= t {
                        *slot += 1;
                    }
                }
            }
        }
    }

    // Assign each prediction to the boundary it overlaps most; ties go to
    // the smaller boundary index, zero overlap to nothing.
    let assignments: Vec<Option<usize>> = overlap
        .iter()
        .map(|counts| {
            let (best_g, best_count) = counts
                .iter()
                .enumerate()
                .fold((0, 0), |acc, (g, &c)| if c > acc.1 { (g, c) } else { acc });
            (best_count > 0).then_some(best_g)
        })
        .collect();

    let gt_correct: Vec<bool> = (0..gts.len())
        .map(|g| {
            let assigned: Vec<usize> = assignments
                .iter()
                .enumerate()
                .filter_map(|(p, a)| (*a == Some(g)).then_some(p))
                .collect();
            if assigned.len() != 1 {
                return false;
            }
            let Some(required) = config.min_cover else { return true };
            // Strict mode: the lone assigned prediction must also cover the
            // boundary, not merely touch it.
            let covered = gt_samples[g]
                .iter()
                .filter(|&&q| {
                    pred_samples[assigned[0]]
                        .iter()
                        .any(|&s| s.distance(q) <= TOPOLOGY_RADIUS_PX)
                })
                .count();
            covered as f64 >= required * gt_samples[g].len() as f64
        })
        .collect();

    Ok(ImageTerms { pred_points, gt_points, pred_hits, gt_hits, assignments, gt_correct })
}

/// Computes all per-image terms, optionally on `config.jobs` threads. The
/// output order always matches the input order.
fn batch_terms(
    preds: &[Vec<Polyline>],
    gts: &[Vec<Polyline>],
    config: &EvalConfig,
) -> Result<Vec<ImageTerms>> {
    if preds.len() != gts.len() {
        return Err(Error::parameter(
            "preds",
            format!("{} prediction sets for {} ground-truth sets", preds.len(), gts.len()),
        ));
    }
    config.validate()?;
    let jobs = config.jobs.min(preds.len().max(1));
    if jobs <= 1 {
        return preds.iter().zip(gts).map(|(p, g)| image_terms(p, g, config)).collect();
    }
    let mut slots: Vec<Option<Result<ImageTerms>>> = Vec::new();
    slots.resize_with(preds.len(), || None);
    let slot_refs: Vec<_> = slots.iter_mut().collect();
    std::thread::scope(|scope| {
        // Round-robin striping keeps the work balanced when scene sizes vary.
        let mut stripes: Vec<Vec<(usize, &mut Option<Result<ImageTerms>>)>> =
            (0..jobs).map(|_| Vec::new()).collect();
        for (i, slot) in slot_refs.into_iter().enumerate() {
            stripes[i % jobs].push((i, slot));
        }
        for stripe in stripes {
            scope.spawn(move || {
                for (i, slot) in stripe {
                    *slot = Some(image_terms(&preds[i], &gts[i], config));
                }
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every image index was handed to exactly one worker"))
        .collect()
}

fn ratio(numerator: usize, denominator: usize) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

fn f1_of(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn metrics_from(
    thresholds: &[f64],
    pred_hits: &[usize],
    pred_points: usize,
    gt_hits: &[usize],
    gt_points: usize,
) -> Vec<ThresholdMetrics> {
    thresholds
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let precision = ratio(pred_hits[i], pred_points);
            let recall = ratio(gt_hits[i], gt_points);
            ThresholdMetrics { threshold_px: t, precision, recall, f1: f1_of(precision, recall) }
        })
        .collect()
}

/// Evaluates a batch of predicted polyline sets against aligned ground-truth
/// sets: precision/recall/F1 at each configured threshold (aggregated by
/// summed counts across images), the topology summary, and a per-image
/// breakdown.
pub fn precision_recall(
    preds: &[Vec<Polyline>],
    gts: &[Vec<Polyline>],
    config: &EvalConfig,
) -> Result<EvalReport> {
    let terms = batch_terms(preds, gts, config)?;
    let n = config.thresholds_px.len();
    let mut pred_hits = vec![0usize; n];
    let mut gt_hits = vec![0usize; n];
    let (mut pred_points, mut gt_points) = (0usize, 0usize);
    let (mut gt_count, mut correct_count) = (0usize, 0usize);
    let mut per_image = Vec::with_capacity(terms.len());
    for t in &terms {
        for i in 0..n {
            pred_hits[i] += t.pred_hits[i];
            gt_hits[i] += t.gt_hits[i];
        }
        pred_points += t.pred_points;
        gt_points += t.gt_points;
        gt_count += t.gt_correct.len();
        correct_count += t.gt_correct.iter().filter(|&&c| c).count();
        per_image.push(ImageMetrics {
            pred_points: t.pred_points,
            gt_points: t.gt_points,
            thresholds: metrics_from(
                &config.thresholds_px,
                &t.pred_hits,
                t.pred_points,
                &t.gt_hits,
                t.gt_points,
            ),
        });
    }
    Ok(EvalReport {
        thresholds: metrics_from(&config.thresholds_px, &pred_hits, pred_points, &gt_hits, gt_points),
        topology: TopologySummary {
            gt_count,
            correct_count,
            fraction: ratio(correct_count, gt_count),
        },
        per_image,
        degenerate_precision: pred_points == 0,
        degenerate_recall: gt_points == 0,
    })
}

/// Topology correctness alone: assigns each predicted polyline to the
/// ground-truth boundary with the largest densified-point overlap within
/// 20 px and checks that every boundary received exactly one prediction.
pub fn topology_correctness(
    preds: &[Vec<Polyline>],
    gts: &[Vec<Polyline>],
    config: &EvalConfig,
) -> Result<TopologyOutcome> {
    let terms = batch_terms(preds, gts, config)?;
    let gt_count: usize = terms.iter().map(|t| t.gt_correct.len()).sum();
    let correct_count: usize =
        terms.iter().map(|t| t.gt_correct.iter().filter(|&&c| c).count()).sum();
    Ok(TopologyOutcome {
        summary: TopologySummary {
            gt_count,
            correct_count,
            fraction: ratio(correct_count, gt_count),
        },
        assignments: terms.into_iter().map(|t| t.assignments).collect(),
    })
}

/// Renders the aggregate table as CSV: a `metric` column followed by one
/// column per threshold, with precision, recall, and F1 rows.
pub fn report_to_csv(report: &EvalReport) -> String {
    let mut out = String::from("metric");
    for t in &report.thresholds {
        out.push_str(&format!(",{}", t.threshold_px));
    }
    out.push('\n');
    for (name, pick) in [
        ("precision", &(|m: &ThresholdMetrics| m.precision) as &dyn Fn(&ThresholdMetrics) -> f64),
        ("recall", &|m: &ThresholdMetrics| m.recall),
        ("f1", &|m: &ThresholdMetrics| m.f1),
    ] {
        out.push_str(name);
        for m in &report.thresholds {
            out.push_str(&format!(",{:.4}", pick(m)));
        }
        out.push('\n');
    }
    out
}
