//! Training objectives with hand-derived gradients.
//!
//! Four pure losses — symmetric Chamfer between polylines, cosine direction
//! loss, weight-normalized focal loss, and distance-field mean-squared error
//! — plus their weighted sum. No optimizer lives here; the point is that the
//! gradient math is written down once, verified against central finite
//! differences, and ready for a learned predictor to train against the same
//! interfaces the deterministic oracle implements today.
//!
//! Gradients at the non-smooth points (Chamfer's nearest-neighbor switches,
//! focal's clamped probabilities) are one-sided subgradients: the argmin or
//! clamp is held fixed and differentiated through. Finite-difference checks
//! therefore steer clear of exact ties.

use crate::error::{Error, Result};
use crate::geom::{Point, Polyline};
use crate::grid::Grid;
use crate::raster::DistanceField;

/// Probability floor applied when a target class is assigned zero mass.
const PROB_FLOOR: f64 = 1e-12;

/// Relative weights of the four loss terms and the focal exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub lambda_chamfer: f64,
    pub lambda_cosine: f64,
    pub lambda_focal: f64,
    pub lambda_dt: f64,
    pub focal_gamma: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda_chamfer: 1.0,
            lambda_cosine: 100.0,
            lambda_focal: 10.0,
            lambda_dt: 10.0,
            focal_gamma: 2.0,
        }
    }
}

impl LossWeights {
    /// All weights and the exponent must be non-negative.
    pub fn validate(&self) -> Result<()> {
        let entries = [
            ("lambda_chamfer", self.lambda_chamfer),
            ("lambda_cosine", self.lambda_cosine),
            ("lambda_focal", self.lambda_focal),
            ("lambda_dt", self.lambda_dt),
            ("focal_gamma", self.focal_gamma),
        ];
        for (name, v) in entries {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::parameter(name, "must be non-negative"));
            }
        }
        Ok(())
    }
}

/// A scalar loss with its gradient w.r.t. the first polyline's vertices.
#[derive(Debug, Clone)]
pub struct ChamferLoss {
    pub value: f64,
    /// One (d/dx, d/dy) pair per vertex of the first argument.
    pub grad: Vec<[f64; 2]>,
}

/// A scalar loss with its gradient w.r.t. a raw (unnormalized) 2-vector.
#[derive(Debug, Clone, Copy)]
pub struct VectorLoss {
    pub value: f64,
    pub grad: [f64; 2],
}

/// A scalar loss with per-sample, per-class logit gradients.
#[derive(Debug, Clone)]
pub struct FocalLoss {
    pub value: f64,
    /// d value / d logit, one row of 3 per sample.
    pub grad: Vec<[f64; 3]>,
    /// Set when some target probability had to be floored away from zero.
    pub clamped: bool,
}

/// A scalar loss with a per-pixel gradient grid.
#[derive(Debug, Clone)]
pub struct FieldLoss {
    pub value: f64,
    pub grad: Grid<f64>,
}

/// A resampled polyline point that remembers where it came from: segment
/// index and interpolation parameter, so gradients can flow back to the
/// original vertices. The parameter is a fixed fraction of its segment, so
/// the sample depends on the vertices only through the lerp endpoints.
struct ArcSample {
    point: Point,
    segment: usize,
    t: f64,
}

/// Resamples a polyline with the same per-segment rule as [`crate::geom::densify`]
/// (each segment split into `ceil(len/spacing)` equal parts), keeping each
/// sample's provenance for the gradient.
fn arc_samples(poly: &Polyline, spacing: f64) -> Vec<ArcSample> {
    let pts = poly.points();
    let mut samples = Vec::new();
    for (segment, w) in pts.windows(2).enumerate() {
        let len = w[0].distance(w[1]);
        let parts = ((len / spacing) - 1e-9).ceil().max(1.0) as usize;
        for k in 0..parts {
            let t = k as f64 / parts as f64;
            samples.push(ArcSample { point: lerp(w[0], w[1], t), segment, t });
        }
    }
    samples.push(ArcSample { point: pts[pts.len() - 1], segment: pts.len() - 2, t: 1.0 });
    samples
}

fn lerp(a: Point, b: Point, t: f64) -> Point {
    Point::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)
}

/// Index of the sample nearest to `p` (strict comparison keeps the first on
/// ties) together with the distance.
fn nearest(p: Point, samples: &[ArcSample]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, s) in samples.iter().enumerate() {
        let d = p.distance(s.point);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Symmetric Chamfer distance between two polylines resampled at `spacing`,
/// with the analytic subgradient w.r.t. `p`'s vertices. Both directed sums
/// contribute: `p`-samples pulled toward their nearest `q`-sample, and
/// `p`-samples that serve as someone's nearest neighbor pushed to meet them.
pub fn chamfer(p: &Polyline, q: &Polyline, spacing: f64) -> Result<ChamferLoss> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::parameter("spacing", "must be positive"));
    }
    let ps = arc_samples(p, spacing);
    let qs = arc_samples(q, spacing);

    // Directed sums kept separate so that swapping the arguments reproduces
    // the same two partial sums and the value is symmetric to the last bit.
    let mut forward = 0.0;
    let mut backward = 0.0;
    let mut grad = vec![[0.0, 0.0]; p.points().len()];
    // Distributes d‖sample − other‖/d sample onto the sample's two parent
    // vertices with barycentric weights (1−t, t).
    let pull = |grad: &mut Vec<[f64; 2]>, s: &ArcSample, other: Point, d: f64| {
        if d <= 0.0 {
            return;
        }
        let ux = (s.point.x - other.x) / d;
        let uy = (s.point.y - other.y) / d;
        grad[s.segment][0] += (1.0 - s.t) * ux;
        grad[s.segment][1] += (1.0 - s.t) * uy;
        grad[s.segment + 1][0] += s.t * ux;
        grad[s.segment + 1][1] += s.t * uy;
    };

    for s in &ps {
        let (j, d) = nearest(s.point, &qs);
        forward += d;
        pull(&mut grad, s, qs[j].point, d);
    }
    for s in &qs {
        let (i, d) = nearest(s.point, &ps);
        backward += d;
        pull(&mut grad, &ps[i], s.point, d);
    }
    Ok(ChamferLoss { value: forward + backward, grad })
}

/// One minus the cosine similarity of two directions, with the gradient
/// w.r.t. the raw (pre-normalization) first vector.
pub fn cosine_loss(pred: [f64; 2], gt: [f64; 2]) -> Result<VectorLoss> {
    let pn = (pred[0] * pred[0] + pred[1] * pred[1]).sqrt();
    let gn = (gt[0] * gt[0] + gt[1] * gt[1]).sqrt();
    if pn == 0.0 || gn == 0.0 {
        return Err(Error::parameter("direction", "zero vector has no direction"));
    }
    let ph = [pred[0] / pn, pred[1] / pn];
    let gh = [gt[0] / gn, gt[1] / gn];
    let dot = ph[0] * gh[0] + ph[1] * gh[1];
    // d(p̂·ĝ)/dp = (ĝ − (p̂·ĝ)p̂)/|p|; the loss negates it.
    let grad = [-(gh[0] - dot * ph[0]) / pn, -(gh[1] - dot * ph[1]) / pn];
    Ok(VectorLoss { value: 1.0 - dot, grad })
}

/// Focal loss normalized by the summed focal weights: with
/// `w = (1 − p_target)^γ`, returns `Σ −w·log p_target / Σ w`. The gradient
/// is taken w.r.t. the logits that would produce `probs` under a softmax,
/// differentiating through the normalizing denominator as well.
pub fn focal_normalized(
    probs: &[[f64; 3]],
    targets: &[usize],
    gamma: f64,
) -> Result<FocalLoss> {
    if probs.len() != targets.len() {
        return Err(Error::parameter("targets", "one target per probability row required"));
    }
    if probs.is_empty() {
        return Err(Error::parameter("probs", "at least one sample required"));
    }
    let mut clamped = false;
    let mut rows = Vec::with_capacity(probs.len());
    for (i, (row, &target)) in probs.iter().zip(targets).enumerate() {
        if target >= 3 {
            return Err(Error::parameter("targets", format!("sample {i}: class out of range")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-6 || row.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::parameter(
                "probs",
                format!("sample {i}: row is not a probability distribution"),
            ));
        }
        let mut pt = row[target];
        if pt < PROB_FLOOR {
            pt = PROB_FLOOR;
            clamped = true;
        }
        rows.push((row, target, pt));
    }

    let mut loss_sum = 0.0;
    let mut weight_sum = 0.0;
    for &(_, _, pt) in &rows {
        let w = (1.0 - pt).powf(gamma);
        loss_sum += -w * pt.ln();
        weight_sum += w;
    }
    if weight_sum == 0.0 {
        // Every sample predicted its target with probability one.
        return Ok(FocalLoss { value: 0.0, grad: vec![[0.0; 3]; probs.len()], clamped });
    }
    let value = loss_sum / weight_sum;

    let mut grad = Vec::with_capacity(probs.len());
    for &(row, target, pt) in &rows {
        // Per-sample scalars: dℓ/dp_t and dw/dp_t, then the quotient rule.
        let w = (1.0 - pt).powf(gamma);
        let dw = if gamma == 0.0 { 0.0 } else { -gamma * (1.0 - pt).powf(gamma - 1.0) };
        let dl = -dw * pt.ln() - w / pt;
        let dvalue_dpt = (dl * weight_sum - loss_sum * dw) / (weight_sum * weight_sum);
        // Softmax Jacobian: dp_t/dz_c = p_t(δ_tc − p_c).
        let mut g = [0.0; 3];
        for (c, slot) in g.iter_mut().enumerate() {
            let delta = if c == target { 1.0 } else { 0.0 };
            *slot = dvalue_dpt * pt * (delta - row[c]);
        }
        grad.push(g);
    }
    Ok(FocalLoss { value, grad, clamped })
}

/// Mean squared error between two distance fields of equal shape, with the
/// per-pixel gradient `2(pred − gt)/N`.
pub fn dt_l2(pred: &DistanceField, gt: &DistanceField) -> Result<FieldLoss> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(Error::parameter("gt", "distance fields must have equal shape"));
    }
    let n = (pred.width() * pred.height()) as f64;
    let mut value = 0.0;
    let mut grad = Grid::filled(pred.width(), pred.height(), 0.0);
    for (slot, (a, b)) in
        grad.raw_mut().iter_mut().zip(pred.grid().raw().iter().zip(gt.grid().raw()))
    {
        let diff = a - b;
        value += diff * diff;
        *slot = 2.0 * diff / n;
    }
    Ok(FieldLoss { value: value / n, grad })
}

/// The four scalar loss values to be combined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub chamfer: f64,
    pub cosine: f64,
    pub focal: f64,
    pub dt: f64,
}

/// Weighted sum of the four terms. Any non-finite part is rejected by name.
pub fn total_loss(parts: LossParts, weights: &LossWeights) -> Result<f64> {
    weights.validate()?;
    let named = [
        ("chamfer", parts.chamfer),
        ("cosine", parts.cosine),
        ("focal", parts.focal),
        ("dt", parts.dt),
    ];
    for (name, v) in named {
        if !v.is_finite() {
            return Err(Error::domain(format!("non-finite {name} loss term")));
        }
    }
    Ok(weights.lambda_chamfer * parts.chamfer
        + weights.lambda_cosine * parts.cosine
        + weights.lambda_focal * parts.focal
        + weights.lambda_dt * parts.dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// |a − b| within `rel` of the larger magnitude, with an absolute floor
    /// so near-zero derivatives don't demand impossible relative precision.
    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= 1e-7 + rel * a.abs().max(b.abs())
    }

    fn line(points: &[(f64, f64)]) -> Polyline {
        Polyline::new(points.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn chamfer_of_a_polyline_with_itself_is_zero() {
        let p = line(&[(0.0, 0.0), (10.0, 0.0), (20.0, 5.0)]);
        let out = chamfer(&p, &p, 1.0).unwrap();
        assert_eq!(out.value, 0.0);
        assert!(out.grad.iter().all(|g| g == &[0.0, 0.0]));
    }

    #[test]
    fn parallel_segments_cost_their_offset_per_sample() {
        // Length-10 segments sampled at spacing 1 carry 11 points each;
        // offset 3 apart, every point pays 3 in both directions: 66.
        let p = line(&[(0.0, 0.0), (10.0, 0.0)]);
        let q = line(&[(0.0, 3.0), (10.0, 3.0)]);
        let out = chamfer(&p, &q, 1.0).unwrap();
        assert!((out.value - 66.0).abs() < 1e-12, "got {}", out.value);
    }

    #[test]
    fn chamfer_is_symmetric_and_non_negative() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut pts = |n: usize| {
                line(
                    &(0..n)
                        .map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
                        .collect::<Vec<_>>(),
                )
            };
            let p = pts(4);
            let q = pts(3);
            let pq = chamfer(&p, &q, 1.0).unwrap().value;
            let qp = chamfer(&q, &p, 1.0).unwrap().value;
            assert_eq!(pq, qp);
            assert!(pq >= 0.0);
        }
    }

    #[test]
    fn chamfer_rejects_non_positive_spacing() {
        let p = line(&[(0.0, 0.0), (10.0, 0.0)]);
        assert!(chamfer(&p, &p, 0.0).is_err());
        assert!(chamfer(&p, &p, -1.0).is_err());
    }

    #[test]
    fn chamfer_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut tested = 0;
        while tested < 100 {
            let n = rng.gen_range(2..5usize);
            let pts: Vec<(f64, f64)> = (0..n)
                .map(|i| (i as f64 * 12.0 + rng.gen_range(-2.0..2.0), rng.gen_range(0.0..30.0)))
                .collect();
            let q_pts: Vec<(f64, f64)> = (0..3)
                .map(|i| (i as f64 * 15.0 + rng.gen_range(-2.0..2.0), rng.gen_range(0.0..30.0)))
                .collect();
            let p = line(&pts);
            let q = line(&q_pts);
            // Random direction in vertex space for a directional derivative.
            let dir: Vec<[f64; 2]> =
                (0..n).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
            let shift = |h: f64| {
                line(
                    &pts.iter()
                        .zip(&dir)
                        .map(|(&(x, y), d)| (x + h * d[0], y + h * d[1]))
                        .collect::<Vec<_>>(),
                )
            };
            let h = 1e-5;
            let plus = chamfer(&shift(h), &q, 1.0).unwrap().value;
            let minus = chamfer(&shift(-h), &q, 1.0).unwrap().value;
            let fd = (plus - minus) / (2.0 * h);
            let out = chamfer(&p, &q, 1.0).unwrap();
            let analytic: f64 =
                out.grad.iter().zip(&dir).map(|(g, d)| g[0] * d[0] + g[1] * d[1]).sum();
            // Nearest-neighbor assignments can flip inside the stencil; skip
            // those non-smooth draws rather than loosening the tolerance.
            if !close(fd, analytic, 1e-4) {
                let wide = (chamfer(&shift(8.0 * h), &q, 1.0).unwrap().value
                    - chamfer(&shift(-8.0 * h), &q, 1.0).unwrap().value)
                    / (16.0 * h);
                if !close(wide, fd, 1e-3) {
                    continue;
                }
            }
            assert!(close(fd, analytic, 1e-4), "fd {fd} vs analytic {analytic}");
            tested += 1;
        }
    }

    #[test]
    fn cosine_loss_spans_zero_to_two() {
        let same = cosine_loss([3.0, 0.0], [1.0, 0.0]).unwrap();
        assert!(same.value.abs() < 1e-15);
        let opposite = cosine_loss([-2.0, 0.0], [1.0, 0.0]).unwrap();
        assert!((opposite.value - 2.0).abs() < 1e-15);
        assert!(cosine_loss([0.0, 0.0], [1.0, 0.0]).is_err());
    }

    #[test]
    fn cosine_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let pred = [rng.gen_range(-2.0..2.0f64), rng.gen_range(-2.0..2.0)];
            let gt = [rng.gen_range(-2.0..2.0f64), rng.gen_range(-2.0..2.0)];
            if pred[0].hypot(pred[1]) < 0.1 || gt[0].hypot(gt[1]) < 0.1 {
                continue;
            }
            let out = cosine_loss(pred, gt).unwrap();
            let h = 1e-6;
            for axis in 0..2 {
                let mut plus = pred;
                let mut minus = pred;
                plus[axis] += h;
                minus[axis] -= h;
                let fd = (cosine_loss(plus, gt).unwrap().value
                    - cosine_loss(minus, gt).unwrap().value)
                    / (2.0 * h);
                assert!(
                    (fd - out.grad[axis]).abs() <= 1e-6,
                    "axis {axis}: fd {fd} vs analytic {}",
                    out.grad[axis]
                );
            }
        }
    }

    #[test]
    fn focal_emphasizes_the_one_hard_sample() {
        // Three perfect predictions contribute zero weight; the lone p=0.5
        // sample's normalized loss is exactly −log 0.5.
        let probs = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.5, 0.25, 0.25],
            [0.0, 0.0, 1.0],
        ];
        let targets = [0, 1, 0, 2];
        let out = focal_normalized(&probs, &targets, 2.0).unwrap();
        assert!((out.value - 0.5f64.ln().abs()).abs() < 1e-12, "got {}", out.value);
        assert!(!out.clamped);
    }

    #[test]
    fn focal_with_zero_gamma_is_mean_cross_entropy() {
        let third = 1.0 / 3.0;
        let probs = [[third; 3], [third; 3], [third; 3]];
        let out = focal_normalized(&probs, &[0, 1, 2], 0.0).unwrap();
        assert!((out.value - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn focal_floors_impossible_targets_and_says_so() {
        let out = focal_normalized(&[[0.0, 1.0, 0.0]], &[0], 2.0).unwrap();
        assert!(out.clamped);
        assert!(out.value.is_finite());
    }

    #[test]
    fn focal_rejects_malformed_rows() {
        assert!(focal_normalized(&[[0.5, 0.2, 0.2]], &[0], 2.0).is_err());
        assert!(focal_normalized(&[[0.5, 0.25, 0.25]], &[3], 2.0).is_err());
        assert!(focal_normalized(&[], &[], 2.0).is_err());
    }

    #[test]
    fn focal_gradient_matches_finite_differences_in_logit_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let softmax = |z: &[[f64; 3]]| -> Vec<[f64; 3]> {
            z.iter()
                .map(|row| {
                    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let e: Vec<f64> = row.iter().map(|v| (v - m).exp()).collect();
                    let s: f64 = e.iter().sum();
                    [e[0] / s, e[1] / s, e[2] / s]
                })
                .collect()
        };
        for case in 0..100 {
            let gamma = if case % 2 == 0 { 2.0 } else { 0.0 };
            let n = rng.gen_range(1..4usize);
            let logits: Vec<[f64; 3]> = (0..n)
                .map(|_| {
                    [
                        rng.gen_range(-1.5..1.5),
                        rng.gen_range(-1.5..1.5),
                        rng.gen_range(-1.5..1.5),
                    ]
                })
                .collect();
            let targets: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            let out = focal_normalized(&softmax(&logits), &targets, gamma).unwrap();
            let h = 1e-6;
            for k in 0..n {
                for c in 0..3 {
                    let mut plus = logits.clone();
                    let mut minus = logits.clone();
                    plus[k][c] += h;
                    minus[k][c] -= h;
                    let fd = (focal_normalized(&softmax(&plus), &targets, gamma).unwrap().value
                        - focal_normalized(&softmax(&minus), &targets, gamma).unwrap().value)
                        / (2.0 * h);
                    assert!(
                        close(fd, out.grad[k][c], 1e-5),
                        "sample {k} class {c} γ={gamma}: fd {fd} vs {}",
                        out.grad[k][c]
                    );
                }
            }
        }
    }

    fn field_from(values: &[f64], w: usize, h: usize) -> DistanceField {
        let mut grid = Grid::filled(w, h, 0.0);
        grid.raw_mut().copy_from_slice(values);
        DistanceField::new(grid).unwrap()
    }

    #[test]
    fn dt_l2_measures_mean_squared_error() {
        let a = field_from(&[1.0, 2.0, 3.0, 4.0], 2, 2);
        assert_eq!(dt_l2(&a, &a).unwrap().value, 0.0);
        let b = field_from(&[2.0, 3.0, 4.0, 5.0], 2, 2);
        assert!((dt_l2(&a, &b).unwrap().value - 1.0).abs() < 1e-15);
        let tall = field_from(&[0.0; 6], 2, 3);
        assert!(dt_l2(&a, &tall).is_err());
    }

    #[test]
    fn dt_l2_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let vals: Vec<f64> = (0..12).map(|_| rng.gen_range(1.0..9.0)).collect();
            let gts: Vec<f64> = (0..12).map(|_| rng.gen_range(1.0..9.0)).collect();
            let gt = field_from(&gts, 4, 3);
            let out = dt_l2(&field_from(&vals, 4, 3), &gt).unwrap();
            let pixel = rng.gen_range(0..12);
            let h = 1e-6;
            let mut plus = vals.clone();
            let mut minus = vals.clone();
            plus[pixel] += h;
            minus[pixel] -= h;
            let fd = (dt_l2(&field_from(&plus, 4, 3), &gt).unwrap().value
                - dt_l2(&field_from(&minus, 4, 3), &gt).unwrap().value)
                / (2.0 * h);
            let analytic = out.grad.raw()[pixel];
            assert!((fd - analytic).abs() <= 1e-6, "fd {fd} vs analytic {analytic}");
        }
    }

    #[test]
    fn total_loss_applies_the_published_weights() {
        let weights = LossWeights::default();
        let unit = LossParts { chamfer: 1.0, cosine: 1.0, focal: 1.0, dt: 1.0 };
        assert_eq!(total_loss(unit, &weights).unwrap(), 121.0);
        let zero = LossParts { chamfer: 0.0, cosine: 0.0, focal: 0.0, dt: 0.0 };
        assert_eq!(total_loss(zero, &weights).unwrap(), 0.0);
    }

    #[test]
    fn total_loss_is_linear_in_each_part() {
        let weights = LossWeights::default();
        let base = LossParts { chamfer: 2.0, cosine: 0.0, focal: 0.0, dt: 0.0 };
        let doubled = LossParts { chamfer: 4.0, ..base };
        assert_eq!(
            2.0 * total_loss(base, &weights).unwrap(),
            total_loss(doubled, &weights).unwrap()
        );
    }

    #[test]
    fn total_loss_names_a_non_finite_term() {
        let weights = LossWeights::default();
        let bad = LossParts { chamfer: 0.0, cosine: f64::NAN, focal: 0.0, dt: 0.0 };
        match total_loss(bad, &weights) {
            Err(Error::Domain(msg)) => assert!(msg.contains("cosine")),
            other => panic!("expected a domain error, got {other:?}"),
        }
    }
}
