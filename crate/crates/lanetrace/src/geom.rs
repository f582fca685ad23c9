//! Planar geometry primitives shared by the whole pipeline.
//!
//! Coordinate convention, used everywhere in this crate: `x` is the raster
//! column, `y` is the raster row, the origin sits at the top-left corner and
//! `y` increases downward. Angles are measured in this frame with
//! [`f64::atan2`]`(dy, dx)`, so heading `0` points along `+x` (rightward) and
//! heading `π/2` points along `+y` (downward on screen). All angles are kept
//! canonical in the half-open interval `(-π, π]`.

use crate::error::{Error, Result};
use crate::grid::Grid;

// ───────────────────────────── points ─────────────────────────────

/// A point in raster coordinates (`x` = column, `y` = row).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    /// Column coordinate.
    pub x: f64,
    /// Row coordinate (grows downward).
    pub y: f64,
}

impl Point {
    /// Creates a point. Coordinates are expected to be finite; this is
    /// enforced wherever points enter the system (polyline construction,
    /// scene generation), not on every arithmetic intermediate.
    #[inline]
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Both coordinates are finite.
    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Euclidean distance to `other`.
    #[inline]
    pub fn distance(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// `self + t * (other - self)`, the affine interpolation.
    #[inline]
    pub fn lerp(&self, other: Point, t: f64) -> Point {
        Point::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }

    /// Translates by `(dx, dy)`.
    #[inline]
    pub fn offset(&self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }
}

// ───────────────────────────── angles ─────────────────────────────

/// An angle in radians, kept canonical in `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(f64);

impl Angle {
    /// Wraps an arbitrary finite angle into the canonical interval.
    pub fn new(radians: f64) -> Self {
        debug_assert!(radians.is_finite(), "angle must be finite");
        // Already-canonical values (every `atan2` result is one) pass through
        // untouched; wrapping them through `rem_euclid` would cost an ulp of
        // precision and break exact symmetries like ±atan2(5, 10).
        if radians > -std::f64::consts::PI && radians <= std::f64::consts::PI {
            return Angle(radians);
        }
        let two_pi = std::f64::consts::TAU;
        let mut r = radians.rem_euclid(two_pi); // [0, 2π)
        if r > std::f64::consts::PI {
            r -= two_pi;
        }
        Angle(r)
    }

    /// Canonical value in radians, inside `(-π, π]`.
    #[inline]
    pub fn radians(&self) -> f64 {
        self.0
    }

    /// Cosine of the angle.
    #[inline]
    pub fn cos(&self) -> f64 {
        self.0.cos()
    }

    /// Sine of the angle.
    #[inline]
    pub fn sin(&self) -> f64 {
        self.0.sin()
    }

    /// Unit direction vector `(cos, sin)` for this heading.
    #[inline]
    pub fn direction(&self) -> (f64, f64) {
        (self.0.cos(), self.0.sin())
    }

    /// The opposite heading (adds π, re-canonicalized).
    #[inline]
    pub fn reversed(&self) -> Angle {
        Angle::new(self.0 + std::f64::consts::PI)
    }

    /// Smallest signed difference `self - other`, wrapped into `(-π, π]`.
    #[inline]
    pub fn signed_distance(&self, other: Angle) -> f64 {
        Angle::new(self.0 - other.0).radians()
    }

    /// Absolute angular separation in `[0, π]`.
    #[inline]
    pub fn separation(&self, other: Angle) -> f64 {
        // Fold the raw difference directly instead of re-canonicalizing via
        // `Angle::new`: this keeps the result exactly symmetric for inputs
        // that are exact reflections of each other (e.g. ±atan2(5, 10)),
        // which downstream tie-breaking relies on.
        let diff = (self.0 - other.0).abs();
        if diff > std::f64::consts::PI {
            std::f64::consts::TAU - diff
        } else {
            diff
        }
    }
}

/// Heading of the vector from `a` to `b`.
///
/// Returns an error when the points coincide exactly — a zero vector has no
/// direction. Swapping the arguments adds π (mod 2π) to the result.
pub fn heading_between(a: Point, b: Point) -> Result<Angle> {
    if a == b {
        return Err(Error::domain(format!(
            "heading undefined for coincident points ({}, {})",
            a.x, a.y
        )));
    }
    Ok(Angle::new((b.y - a.y).atan2(b.x - a.x)))
}

// ──────────────────────────── polylines ────────────────────────────

/// An open polygonal chain with at least two points and no zero-length
/// segment (consecutive points must be distinct).
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Point>,
}

impl Polyline {
    /// Validates and wraps a point list.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::domain(format!(
                "polyline needs at least 2 points, got {}",
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::domain(format!("polyline point #{i} is not finite")));
            }
        }
        for (i, pair) in points.windows(2).enumerate() {
            if pair[0] == pair[1] {
                return Err(Error::domain(format!(
                    "polyline has zero-length segment at index {i}"
                )));
            }
        }
        Ok(Polyline { points })
    }

    /// The vertices, in order.
    #[inline]
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Number of vertices.
    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false: a polyline has at least two points.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Consecutive vertex pairs (the segments).
    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    /// Total arc length.
    pub fn arc_length(&self) -> f64 {
        self.segments().map(|(a, b)| a.distance(b)).sum()
    }

    /// Exact Euclidean distance from `p` to the nearest point on the chain.
    pub fn distance_to_point(&self, p: Point) -> f64 {
        self.segments()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Exact distance from point `p` to segment `ab`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(a.lerp(b, t))
}

/// Resamples `poly` so that no gap between consecutive output points exceeds
/// `spacing`, while keeping every original vertex.
///
/// Each segment of length `L` is split into `ceil(L / spacing)` equal parts
/// (computed with a 1e-9 slack so that segments whose length is an exact
/// multiple of `spacing` are not over-split by floating-point noise). The
/// operation preserves arc length exactly up to rounding and is idempotent:
/// densifying an already-densified chain inserts nothing, because every gap
/// is already at most `spacing`.
pub fn densify(poly: &Polyline, spacing: f64) -> Result<Polyline> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::parameter("spacing", format!("must be positive, got {spacing}")));
    }
    let mut out = Vec::with_capacity(poly.len());
    for (a, b) in poly.segments() {
        out.push(a);
        let len = a.distance(b);
        let parts = ((len / spacing) - 1e-9).ceil().max(1.0) as usize;
        for k in 1..parts {
            out.push(a.lerp(b, k as f64 / parts as f64));
        }
    }
    out.push(*poly.points.last().expect("polyline has points"));
    Polyline::new(out)
}

// ─────────────────────────── rotated RoIs ───────────────────────────

/// An oriented rectangular region of interest.
///
/// The RoI's local frame is centered at `center` with its local `+x` axis
/// aligned with `heading`; local `+y` is `heading` rotated by +π/2 (i.e. the
/// usual raster-frame rotation, so for heading 0 local axes coincide with the
/// raster axes). `width_px` extends along the heading, `height_px` across it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedRoi {
    /// Center of the region in raster coordinates.
    pub center: Point,
    /// Direction of the local `+x` axis.
    pub heading: Angle,
    /// Extent across the heading, in pixels (output rows).
    pub height_px: usize,
    /// Extent along the heading, in pixels (output columns).
    pub width_px: usize,
}

impl RotatedRoi {
    /// Creates a region; extents must be non-zero.
    pub fn new(center: Point, heading: Angle, height_px: usize, width_px: usize) -> Result<Self> {
        if height_px == 0 || width_px == 0 {
            return Err(Error::parameter(
                "roi extent",
                format!("extents must be non-zero, got {height_px}x{width_px}"),
            ));
        }
        Ok(RotatedRoi { center, heading, height_px, width_px })
    }

    /// Raster-frame position of the output cell `(row, col)`.
    ///
    /// Cell `(row, col)` sits at local coordinates
    /// `u = col - (width_px - 1) / 2` (along heading) and
    /// `v = row - (height_px - 1) / 2` (across heading).
    #[inline]
    pub fn cell_position(&self, row: usize, col: usize) -> Point {
        let u = col as f64 - (self.width_px as f64 - 1.0) / 2.0;
        let v = row as f64 - (self.height_px as f64 - 1.0) / 2.0;
        let (c, s) = self.heading.direction();
        self.center.offset(u * c - v * s, u * s + v * c)
    }

    /// Axis-aligned bounding box `(min_x, min_y, max_x, max_y)` of the four
    /// corner cell positions.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let corners = [
            self.cell_position(0, 0),
            self.cell_position(0, self.width_px - 1),
            self.cell_position(self.height_px - 1, 0),
            self.cell_position(self.height_px - 1, self.width_px - 1),
        ];
        let mut bb = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in corners {
            bb.0 = bb.0.min(p.x);
            bb.1 = bb.1.min(p.y);
            bb.2 = bb.2.max(p.x);
            bb.3 = bb.3.max(p.y);
        }
        bb
    }
}

// ────────────────────────── bilinear sampling ──────────────────────────

/// Bilinear sample of `grid` at real coordinates `(x, y)`.
///
/// Grid values live at integer lattice points. Neighbors outside the grid
/// contribute 0, so samples decay smoothly to 0 across the border and any
/// sample taken fully outside the grid is exactly 0 — out-of-bounds regions
/// never fabricate intensity.
pub fn bilinear_at(grid: &Grid<f64>, x: f64, y: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let (xi, yi) = (x0 as i64, y0 as i64);
    let v00 = grid.get_or(xi, yi, 0.0);
    let v10 = grid.get_or(xi + 1, yi, 0.0);
    let v01 = grid.get_or(xi, yi + 1, 0.0);
    let v11 = grid.get_or(xi + 1, yi + 1, 0.0);
    v00 * (1.0 - fx) * (1.0 - fy) + v10 * fx * (1.0 - fy) + v01 * (1.0 - fx) * fy + v11 * fx * fy
}

/// Samples `grid` over a rotated RoI, producing a `height_px x width_px`
/// output grid in the RoI's local frame (row = across heading, col = along).
///
/// With heading 0, integer center and odd extents the sample positions land
/// exactly on lattice points, so the output equals direct sub-grid indexing.
pub fn sample_bilinear(grid: &Grid<f64>, roi: &RotatedRoi) -> Grid<f64> {
    let mut out = Grid::filled(roi.width_px, roi.height_px, 0.0);
    for row in 0..roi.height_px {
        for col in 0..roi.width_px {
            let p = roi.cell_position(row, col);
            *out.get_mut(col, row) = bilinear_at(grid, p.x, p.y);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn poly(points: &[(f64, f64)]) -> Polyline {
        Polyline::new(points.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    // ── angles ──

    #[test]
    fn angle_canonicalization_keeps_pi_and_wraps_negative_pi() {
        assert_eq!(Angle::new(PI).radians(), PI);
        assert_eq!(Angle::new(-PI).radians(), PI);
        assert_eq!(Angle::new(3.0 * PI).radians(), PI);
        assert!((Angle::new(2.0 * PI).radians()).abs() < 1e-12);
        assert!((Angle::new(-3.0 * FRAC_PI_2).radians() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn heading_between_matches_atan2_convention() {
        // One row down is +π/2 in the y-down raster frame.
        let h = heading_between(Point::new(0.0, 0.0), Point::new(0.0, 1.0)).unwrap();
        assert!((h.radians() - FRAC_PI_2).abs() < 1e-12);
        // Reversing the arguments adds π (mod 2π).
        let back = heading_between(Point::new(0.0, 1.0), Point::new(0.0, 0.0)).unwrap();
        assert!(back.separation(h.reversed()) < 1e-12);
        // Coincident points have no heading.
        assert!(heading_between(Point::new(1.0, 2.0), Point::new(1.0, 2.0)).is_err());
    }

    // ── polylines & densify ──

    #[test]
    fn polyline_rejects_degenerate_inputs() {
        assert!(Polyline::new(vec![Point::new(0.0, 0.0)]).is_err());
        assert!(Polyline::new(vec![Point::new(0.0, 0.0), Point::new(0.0, 0.0)]).is_err());
        assert!(Polyline::new(vec![Point::new(0.0, 0.0), Point::new(f64::NAN, 1.0)]).is_err());
    }

    #[test]
    fn densify_unit_segment_yields_eleven_points() {
        let p = poly(&[(0.0, 0.0), (0.0, 10.0)]);
        let d = densify(&p, 1.0).unwrap();
        assert_eq!(d.len(), 11);
        for (i, pt) in d.points().iter().enumerate() {
            assert!((pt.y - i as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn densify_l_shape_yields_eight_points_and_arc_length_seven() {
        // Segments of length 3 and 4: 4 points on the first (including both
        // corners), then 4 more finishing the second.
        let p = poly(&[(0.0, 0.0), (3.0, 0.0), (3.0, 4.0)]);
        let d = densify(&p, 1.0).unwrap();
        assert_eq!(d.len(), 8);
        assert!((d.arc_length() - 7.0).abs() < 1e-9);
        // Original vertices are kept.
        assert!(d.points().contains(&Point::new(3.0, 0.0)));
    }

    #[test]
    fn densify_with_spacing_larger_than_length_keeps_endpoints() {
        let p = poly(&[(0.0, 0.0), (1.0, 0.0)]);
        let d = densify(&p, 10.0).unwrap();
        assert_eq!(d.points(), p.points());
    }

    #[test]
    fn densify_rejects_nonpositive_spacing() {
        let p = poly(&[(0.0, 0.0), (1.0, 0.0)]);
        assert!(densify(&p, 0.0).is_err());
        assert!(densify(&p, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn densify_bounds_gaps_preserves_length_and_is_idempotent(
            pts in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 2..8),
            spacing in 0.1f64..5.0,
        ) {
            // Drop consecutive duplicates so the polyline is valid.
            let mut points: Vec<Point> = Vec::new();
            for (x, y) in pts {
                let p = Point::new(x, y);
                if points.last() != Some(&p) {
                    points.push(p);
                }
            }
            prop_assume!(points.len() >= 2);
            let p = Polyline::new(points).unwrap();
            let d = densify(&p, spacing).unwrap();

            // Every gap is at most `spacing` (tiny slack for the division).
            for (a, b) in d.segments() {
                prop_assert!(a.distance(b) <= spacing + 1e-9);
            }
            // Arc length is preserved.
            prop_assert!((d.arc_length() - p.arc_length()).abs() < 1e-9);
            // Idempotence: densifying again changes nothing.
            let dd = densify(&d, spacing).unwrap();
            prop_assert_eq!(dd.len(), d.len());
            for (a, b) in dd.points().iter().zip(d.points()) {
                prop_assert!(a.distance(*b) < 1e-9);
            }
        }
    }

    // ── point/segment distance ──

    #[test]
    fn point_segment_distance_handles_interior_and_endpoints() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(10.0, 0.0);
        assert!((point_segment_distance(Point::new(5.0, 3.0), a, b) - 3.0).abs() < 1e-12);
        assert!((point_segment_distance(Point::new(-4.0, 3.0), a, b) - 5.0).abs() < 1e-12);
        assert!((point_segment_distance(Point::new(13.0, 4.0), a, b) - 5.0).abs() < 1e-12);
    }

    // ── bilinear sampling ──

    #[test]
    fn axis_aligned_integer_roi_is_exact_subgrid_copy() {
        let mut g = Grid::filled(5, 5, 0.0);
        for y in 0..5 {
            for x in 0..5 {
                *g.get_mut(x, y) = (y * 5 + x) as f64;
            }
        }
        let roi = RotatedRoi::new(Point::new(2.0, 2.0), Angle::new(0.0), 3, 3).unwrap();
        let out = sample_bilinear(&g, &roi);
        for r in 0..3 {
            for c in 0..3 {
                let expected = *g.get(c + 1, r + 1);
                assert_eq!(*out.get(c, r), expected, "cell ({r},{c})");
            }
        }
    }

    #[test]
    fn quarter_turn_roi_reads_a_column() {
        // 3x3 ramp grid, value = row*3 + col. A 1x3 RoI rotated to heading
        // π/2 (pointing down the +y axis) sweeps its local +x axis down the
        // center column, so the output reads that column in increasing-row
        // order: 1, 4, 7.
        let g = Grid::from_raw(3, 3, (0..9).map(|v| v as f64).collect());
        let roi = RotatedRoi::new(Point::new(1.0, 1.0), Angle::new(FRAC_PI_2), 1, 3).unwrap();
        let out = sample_bilinear(&g, &roi);
        let got: Vec<f64> = (0..3).map(|c| *out.get(c, 0)).collect();
        for (a, b) in got.iter().zip([1.0, 4.0, 7.0]) {
            assert!((a - b).abs() < 1e-9, "got {got:?}");
        }
    }

    #[test]
    fn samples_outside_the_grid_are_zero() {
        let g = Grid::filled(4, 4, 1.0);
        assert_eq!(bilinear_at(&g, -2.0, 1.0), 0.0);
        assert_eq!(bilinear_at(&g, 1.0, 10.0), 0.0);
        // Half a cell outside: the in-grid corner pair still contributes.
        assert!((bilinear_at(&g, -0.5, 1.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bilinear_interpolates_between_lattice_points() {
        let g = Grid::from_raw(2, 2, vec![0.0, 1.0, 2.0, 3.0]);
        assert!((bilinear_at(&g, 0.5, 0.5) - 1.5).abs() < 1e-12);
        assert!((bilinear_at(&g, 0.25, 0.0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn roi_rejects_zero_extents() {
        assert!(RotatedRoi::new(Point::new(0.0, 0.0), Angle::new(0.0), 0, 3).is_err());
    }
}
