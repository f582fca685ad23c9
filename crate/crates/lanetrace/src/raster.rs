//! Raster containers and the distance-field toolbox.
//!
//! The pipeline's working representation of lane-boundary evidence is a
//! *thresholded inverse distance transform*: an image whose value at pixel
//! `p` is `clamp(8 * (1 - d(p) / 32), 0, 10)` where `d(p)` is the exact
//! Euclidean distance to the nearest boundary pixel. Boundary pixels score 8,
//! the value decays linearly and reaches 0 at 32 px. This module provides:
//!
//! 1. an exact Euclidean distance transform (two-pass lower-envelope
//!    algorithm, O(pixels), exact — validated against brute force in tests),
//! 2. the inverse-threshold encoding above, rasterizing polylines with 1-px
//!    Bresenham strokes of their densified chains,
//! 3. binarization, morphological thinning (Zhang–Suen) and skeleton
//!    endpoint/component analysis used for seeding and topology probes.

use crate::error::{Error, Result};
use crate::geom::{densify, Polyline};
use crate::grid::Grid;

/// Default resolution of bird's-eye-view rasters, meters per pixel.
pub const DEFAULT_RESOLUTION_M_PER_PX: f64 = 0.05;

/// Field value assigned to boundary pixels by the inverse-threshold encoding.
pub const FIELD_BOUNDARY_VALUE: f64 = 8.0;

/// Distance (px) at which the encoded field decays to zero.
pub const FIELD_ZERO_DISTANCE_PX: f64 = 32.0;

/// Upper clamp of the encoded field.
pub const FIELD_MAX_VALUE: f64 = 10.0;

// ───────────────────────────── containers ─────────────────────────────

/// A bird's-eye-view intensity image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityRaster {
    grid: Grid<f64>,
    resolution_m_per_px: f64,
}

impl IntensityRaster {
    /// Wraps a grid, validating the value range and resolution.
    pub fn new(grid: Grid<f64>, resolution_m_per_px: f64) -> Result<Self> {
        if !(resolution_m_per_px > 0.0) || !resolution_m_per_px.is_finite() {
            return Err(Error::parameter(
                "resolution_m_per_px",
                format!("must be positive, got {resolution_m_per_px}"),
            ));
        }
        if let Some((x, y, v)) =
            grid.iter_cells().find(|(_, _, v)| !(0.0..=1.0).contains(*v) || !v.is_finite())
        {
            return Err(Error::domain(format!(
                "intensity out of [0, 1] at ({x}, {y}): {v}"
            )));
        }
        Ok(IntensityRaster { grid, resolution_m_per_px })
    }

    /// The pixel grid.
    pub fn grid(&self) -> &Grid<f64> {
        &self.grid
    }

    /// Meters covered by one pixel.
    pub fn resolution_m_per_px(&self) -> f64 {
        self.resolution_m_per_px
    }

    /// Width in pixels.
    pub fn width(&self) -> usize {
        self.grid.width()
    }

    /// Height in pixels.
    pub fn height(&self) -> usize {
        self.grid.height()
    }
}

/// A thresholded inverse distance field with values in `[0, 10]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    grid: Grid<f64>,
}

impl DistanceField {
    /// Wraps a grid, validating the value range.
    pub fn new(grid: Grid<f64>) -> Result<Self> {
        if let Some((x, y, v)) = grid
            .iter_cells()
            .find(|(_, _, v)| !(0.0..=FIELD_MAX_VALUE).contains(*v) || !v.is_finite())
        {
            return Err(Error::domain(format!("field value out of [0, 10] at ({x}, {y}): {v}")));
        }
        Ok(DistanceField { grid })
    }

    /// The value grid.
    pub fn grid(&self) -> &Grid<f64> {
        &self.grid
    }

    /// Width in pixels.
    pub fn width(&self) -> usize {
        self.grid.width()
    }

    /// Height in pixels.
    pub fn height(&self) -> usize {
        self.grid.height()
    }

    /// Whether integer coordinates fall inside the field.
    pub fn contains(&self, x: i64, y: i64) -> bool {
        self.grid.contains(x, y)
    }
}

/// A boolean pixel mask.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    grid: Grid<bool>,
}

impl BinaryMask {
    /// An all-clear mask of the given dimensions.
    pub fn empty(width: usize, height: usize) -> Self {
        BinaryMask { grid: Grid::filled(width, height, false) }
    }

    /// Wraps an existing boolean grid.
    pub fn from_grid(grid: Grid<bool>) -> Self {
        BinaryMask { grid }
    }

    /// The underlying grid.
    pub fn grid(&self) -> &Grid<bool> {
        &self.grid
    }

    /// Width in pixels.
    pub fn width(&self) -> usize {
        self.grid.width()
    }

    /// Height in pixels.
    pub fn height(&self) -> usize {
        self.grid.height()
    }

    /// Whether the pixel at `(x, y)` is set; out-of-bounds reads are clear.
    #[inline]
    pub fn is_set(&self, x: i64, y: i64) -> bool {
        self.grid.get_or(x, y, false)
    }

    /// Sets the pixel at `(x, y)` if it lies inside the mask.
    #[inline]
    pub fn set(&mut self, x: i64, y: i64) {
        if self.grid.contains(x, y) {
            *self.grid.get_mut(x as usize, y as usize) = true;
        }
    }

    /// Number of set pixels.
    pub fn count_set(&self) -> usize {
        self.grid.raw().iter().filter(|&&b| b).count()
    }

    /// Iterates set pixels `(x, y)` in row-major order.
    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.grid.iter_cells().filter(|(_, _, &v)| v).map(|(x, y, _)| (x, y))
    }

    /// Number of set pixels among the 8 neighbors of `(x, y)`.
    pub fn neighbor_count(&self, x: i64, y: i64) -> usize {
        let mut n = 0;
        for dy in -1..=1i64 {
            for dx in -1..=1i64 {
                if (dx != 0 || dy != 0) && self.is_set(x + dx, y + dy) {
                    n += 1;
                }
            }
        }
        n
    }
}

// ─────────────────────── exact distance transform ───────────────────────

/// Exact Euclidean distance transform.
///
/// Returns, for every pixel, the distance to the nearest set pixel of
/// `mask`. Implemented as the classic separable two-pass algorithm: a 1-D
/// squared-distance pass down each column followed by a lower-envelope-of-
/// parabolas pass along each row. The result is exact (not an approximation),
/// which the tests verify against an O(n·m) brute-force scan.
///
/// Errors if the mask has no set pixel — every distance would be infinite.
pub fn exact_distance_transform(mask: &BinaryMask) -> Result<Grid<f64>> {
    if mask.count_set() == 0 {
        return Err(Error::domain("distance transform of an empty mask".to_string()));
    }
    let (w, h) = (mask.width(), mask.height());
    const INF: f64 = 1e20;

    // Pass 1: per column, squared vertical distance to the nearest set pixel.
    let mut sq = Grid::filled(w, h, INF);
    let mut column = vec![0.0f64; h];
    let mut out_col = vec![0.0f64; h];
    for x in 0..w {
        for y in 0..h {
            column[y] = if mask.is_set(x as i64, y as i64) { 0.0 } else { INF };
        }
        squared_dt_1d(&column, &mut out_col);
        for y in 0..h {
            *sq.get_mut(x, y) = out_col[y];
        }
    }

    // Pass 2: per row, combine with horizontal offsets.
    let mut row = vec![0.0f64; w];
    let mut out_row = vec![0.0f64; w];
    let mut dist = Grid::filled(w, h, 0.0);
    for y in 0..h {
        for x in 0..w {
            row[x] = *sq.get(x, y);
        }
        squared_dt_1d(&row, &mut out_row);
        for x in 0..w {
            *dist.get_mut(x, y) = out_row[x].sqrt();
        }
    }
    Ok(dist)
}

/// 1-D squared distance transform: `out[i] = min_j (i - j)^2 + f[j]`,
/// computed as the lower envelope of the parabolas rooted at each `j`.
fn squared_dt_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    debug_assert_eq!(out.len(), n);
    if n == 0 {
        return;
    }
    // v[k]: abscissa of the k-th parabola in the envelope;
    // z[k]..z[k+1]: interval where it is the minimum.
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k] {
                // The new parabola dominates the current envelope head.
                if k == 0 {
                    break;
                }
                k -= 1;
            } else {
                break;
            }
        }
        if s <= z[k] {
            // Replaces the very first parabola.
            v[0] = q;
        } else {
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
        }
    }
    let mut k = 0usize;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        out[q] = d * d + f[p];
    }
}

// ───────────────────── inverse-threshold field encoding ─────────────────────

/// Applies the inverse-threshold encoding to a raw distance value.
#[inline]
pub fn encode_distance(d: f64) -> f64 {
    (FIELD_BOUNDARY_VALUE * (1.0 - d / FIELD_ZERO_DISTANCE_PX)).clamp(0.0, FIELD_MAX_VALUE)
}

/// Rasterizes `polylines` as 1-px strokes and encodes the exact distance to
/// them as a [`DistanceField`]: 8 on the strokes, linear decay, 0 from 32 px
/// outward. Strokes are drawn by densifying each chain at 1 px and running
/// Bresenham between consecutive rounded points; portions outside the
/// `width x height` canvas are clipped.
///
/// Errors on an empty polyline list, or when every stroke pixel falls
/// outside the canvas.
pub fn inverse_threshold_dt(
    polylines: &[Polyline],
    width: usize,
    height: usize,
) -> Result<DistanceField> {
    if polylines.is_empty() {
        return Err(Error::domain("inverse-threshold encoding of an empty polyline list"));
    }
    let mask = rasterize_polylines(polylines, width, height)?;
    let dist = exact_distance_transform(&mask)?;
    let mut grid = Grid::filled(width, height, 0.0);
    for (x, y, d) in dist.iter_cells() {
        *grid.get_mut(x, y) = encode_distance(*d);
    }
    DistanceField::new(grid)
}

/// Builds the tracing field from a camera-style intensity raster: pixels at
/// or above `mask_threshold` count as boundary evidence, and the encoded
/// exact distance to them forms the field. A raster with no bright pixels at
/// all yields the all-zero field (no evidence anywhere) rather than an
/// error, so downstream tracing degrades to an empty graph.
pub fn field_from_intensity(
    raster: &IntensityRaster,
    mask_threshold: f64,
) -> Result<DistanceField> {
    if !(mask_threshold > 0.0 && mask_threshold < 1.0) {
        return Err(Error::parameter(
            "mask_threshold",
            format!("must lie in (0, 1), got {mask_threshold}"),
        ));
    }
    let mut mask = BinaryMask::empty(raster.width(), raster.height());
    for (x, y, v) in raster.grid().iter_cells() {
        if *v >= mask_threshold {
            mask.set(x as i64, y as i64);
        }
    }
    if mask.count_set() == 0 {
        return DistanceField::new(Grid::filled(raster.width(), raster.height(), 0.0));
    }
    let dist = exact_distance_transform(&mask)?;
    let mut grid = Grid::filled(raster.width(), raster.height(), 0.0);
    for (x, y, d) in dist.iter_cells() {
        *grid.get_mut(x, y) = encode_distance(*d);
    }
    DistanceField::new(grid)
}

/// Rasterizes polylines into a 1-px stroke mask (densify at 1 px, then
/// Bresenham between consecutive rounded points).
pub fn rasterize_polylines(
    polylines: &[Polyline],
    width: usize,
    height: usize,
) -> Result<BinaryMask> {
    let mut mask = BinaryMask::empty(width, height);
    for poly in polylines {
        let dense = densify(poly, 1.0)?;
        for (a, b) in dense.segments() {
            bresenham(
                (a.x.round() as i64, a.y.round() as i64),
                (b.x.round() as i64, b.y.round() as i64),
                |x, y| mask.set(x, y),
            );
        }
    }
    Ok(mask)
}

/// Classic integer Bresenham walk from `a` to `b` inclusive.
pub(crate) fn bresenham(a: (i64, i64), b: (i64, i64), mut visit: impl FnMut(i64, i64)) {
    let (mut x, mut y) = a;
    let dx = (b.0 - a.0).abs();
    let dy = -(b.1 - a.1).abs();
    let sx = if a.0 < b.0 { 1 } else { -1 };
    let sy = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        visit(x, y);
        if x == b.0 && y == b.1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

// ───────────────────────── binarize / skeletonize ─────────────────────────

/// Thresholds a field into a mask: a pixel is set iff `value >= threshold`.
///
/// The threshold must lie strictly inside the field's `(0, 10)` value range —
/// at the extremes the mask degenerates to all-set or all-clear.
pub fn binarize(field: &DistanceField, threshold: f64) -> Result<BinaryMask> {
    binarize_grid(field.grid(), threshold)
}

/// [`binarize`] for a bare grid (used for RoI-local crops).
pub fn binarize_grid(grid: &Grid<f64>, threshold: f64) -> Result<BinaryMask> {
    if !(threshold > 0.0 && threshold < FIELD_MAX_VALUE) {
        return Err(Error::parameter(
            "threshold",
            format!("must lie in (0, {FIELD_MAX_VALUE}), got {threshold}"),
        ));
    }
    let mut mask = BinaryMask::empty(grid.width(), grid.height());
    for (x, y, v) in grid.iter_cells() {
        if *v >= threshold {
            mask.set(x as i64, y as i64);
        }
    }
    Ok(mask)
}

/// Morphological thinning (Zhang–Suen two-subiteration scheme).
///
/// Iteratively peels contour pixels whose removal cannot break 8-connectivity
/// until a fixed point is reached, producing a unit-width skeleton: no
/// skeleton pixel retains a fully-set 3×3 neighborhood. Pixels outside the
/// mask are treated as clear. The deletion rules can eat a compact blob
/// outright (the textbook case is a 2×2 square, gone in one pass); any
/// component erased that way is restored as its first pixel in scan order,
/// so blobs thin to a point rather than to nothing and the component count
/// is preserved exactly.
pub fn skeletonize(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let mut current = mask.clone();
    let mut to_clear: Vec<(usize, usize)> = Vec::new();
    loop {
        let mut changed = false;
        for phase in 0..2 {
            to_clear.clear();
            for y in 0..h as i64 {
                for x in 0..w as i64 {
                    if current.is_set(x, y) && zhang_suen_removable(&current, x, y, phase) {
                        to_clear.push((x as usize, y as usize));
                    }
                }
            }
            if !to_clear.is_empty() {
                changed = true;
                for &(x, y) in &to_clear {
                    *current.grid.get_mut(x, y) = false;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let (labels, count) = connected_components(mask);
    let mut survives = vec![false; count as usize + 1];
    for (x, y) in current.iter_set() {
        survives[*labels.get(x, y) as usize] = true;
    }
    if survives.iter().skip(1).any(|s| !s) {
        for y in 0..h {
            for x in 0..w {
                let label = *labels.get(x, y) as usize;
                if label != 0 && !survives[label] {
                    current.set(x as i64, y as i64);
                    survives[label] = true;
                }
            }
        }
    }
    current
}

/// Zhang–Suen removal predicate for one sub-iteration.
///
/// Neighbors are indexed clockwise from north: p2=N, p3=NE, p4=E, p5=SE,
/// p6=S, p7=SW, p8=W, p9=NW. A contour pixel is removable when its neighbor
/// count is in [2, 6], its circular 0→1 transition count is exactly 1, and
/// the phase-specific corner products vanish.
fn zhang_suen_removable(mask: &BinaryMask, x: i64, y: i64, phase: usize) -> bool {
    let p = |dx: i64, dy: i64| -> u8 { mask.is_set(x + dx, y + dy) as u8 };
    let p2 = p(0, -1);
    let p3 = p(1, -1);
    let p4 = p(1, 0);
    let p5 = p(1, 1);
    let p6 = p(0, 1);
    let p7 = p(-1, 1);
    let p8 = p(-1, 0);
    let p9 = p(-1, -1);
    let ring = [p2, p3, p4, p5, p6, p7, p8, p9];
    let b: u8 = ring.iter().sum();
    if !(2..=6).contains(&b) {
        return false;
    }
    let a = ring
        .iter()
        .zip(ring.iter().cycle().skip(1))
        .filter(|(&cur, &next)| cur == 0 && next == 1)
        .count();
    if a != 1 {
        return false;
    }
    if phase == 0 {
        p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0
    } else {
        p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0
    }
}

/// Skeleton pixels with exactly one set 8-neighbor, in `(y, x)` scan order.
///
/// Expects unit-width input (the output of [`skeletonize`]); on thick blobs
/// the notion of an endpoint is not meaningful.
pub fn skeleton_endpoints(skeleton: &BinaryMask) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for y in 0..skeleton.height() as i64 {
        for x in 0..skeleton.width() as i64 {
            if skeleton.is_set(x, y) && skeleton.neighbor_count(x, y) == 1 {
                out.push((x as usize, y as usize));
            }
        }
    }
    out
}

/// Labels 8-connected components of set pixels.
///
/// Returns `(labels, count)`: `labels` holds 0 for clear pixels and
/// `1..=count` for set pixels. Labels are assigned in deterministic row-major
/// first-encounter order (flood fill from each unvisited set pixel).
pub fn connected_components(mask: &BinaryMask) -> (Grid<u32>, u32) {
    let (w, h) = (mask.width(), mask.height());
    let mut labels = Grid::filled(w, h, 0u32);
    let mut next = 0u32;
    let mut stack: Vec<(i64, i64)> = Vec::new();
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            if !mask.is_set(x, y) || *labels.get(x as usize, y as usize) != 0 {
                continue;
            }
            next += 1;
            stack.push((x, y));
            *labels.get_mut(x as usize, y as usize) = next;
            while let Some((cx, cy)) = stack.pop() {
                for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        let (nx, ny) = (cx + dx, cy + dy);
                        if (dx != 0 || dy != 0)
                            && mask.is_set(nx, ny)
                            && *labels.get(nx as usize, ny as usize) == 0
                        {
                            *labels.get_mut(nx as usize, ny as usize) = next;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
        }
    }
    (labels, next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use proptest::prelude::*;

    /// O(n·m) reference distance transform used as the oracle.
    fn brute_force_dt(mask: &BinaryMask) -> Grid<f64> {
        let set: Vec<(f64, f64)> =
            mask.iter_set().map(|(x, y)| (x as f64, y as f64)).collect();
        assert!(!set.is_empty());
        let mut out = Grid::filled(mask.width(), mask.height(), 0.0);
        for y in 0..mask.height() {
            for x in 0..mask.width() {
                let d = set
                    .iter()
                    .map(|&(sx, sy)| (x as f64 - sx).hypot(y as f64 - sy))
                    .fold(f64::INFINITY, f64::min);
                *out.get_mut(x, y) = d;
            }
        }
        out
    }

    fn mask_from_rows(rows: &[&str]) -> BinaryMask {
        let h = rows.len();
        let w = rows[0].len();
        let mut mask = BinaryMask::empty(w, h);
        for (y, row) in rows.iter().enumerate() {
            for (x, ch) in row.chars().enumerate() {
                if ch == '#' {
                    mask.set(x as i64, y as i64);
                }
            }
        }
        mask
    }

    // ── exact distance transform ──

    #[test]
    fn single_corner_pixel_distances_are_exact() {
        let mut mask = BinaryMask::empty(3, 3);
        mask.set(0, 0);
        let dt = exact_distance_transform(&mask).unwrap();
        let expected = [
            [0.0, 1.0, 2.0],
            [1.0, 2.0f64.sqrt(), 5.0f64.sqrt()],
            [2.0, 5.0f64.sqrt(), 8.0f64.sqrt()],
        ];
        for (y, row) in expected.iter().enumerate() {
            for (x, &e) in row.iter().enumerate() {
                assert!(
                    (dt.get(x, y) - e).abs() < 1e-12,
                    "({x},{y}): got {}, want {e}",
                    dt.get(x, y)
                );
            }
        }
    }

    #[test]
    fn empty_mask_is_rejected() {
        let mask = BinaryMask::empty(4, 4);
        assert!(exact_distance_transform(&mask).is_err());
    }

    #[test]
    fn all_set_mask_is_zero_everywhere() {
        let mask = BinaryMask::from_grid(Grid::filled(5, 3, true));
        let dt = exact_distance_transform(&mask).unwrap();
        assert!(dt.raw().iter().all(|&d| d == 0.0));
    }

    proptest! {
        #[test]
        fn transform_matches_brute_force(
            w in 1usize..24,
            h in 1usize..24,
            seeds in proptest::collection::vec((0usize..24, 0usize..24), 1..12),
        ) {
            let mut mask = BinaryMask::empty(w, h);
            for (x, y) in seeds {
                mask.set((x % w) as i64, (y % h) as i64);
            }
            prop_assume!(mask.count_set() > 0);
            let fast = exact_distance_transform(&mask).unwrap();
            let brute = brute_force_dt(&mask);
            for y in 0..h {
                for x in 0..w {
                    prop_assert!(
                        (fast.get(x, y) - brute.get(x, y)).abs() < 1e-9,
                        "mismatch at ({}, {})", x, y
                    );
                }
            }
        }
    }

    // ── inverse-threshold encoding ──

    #[test]
    fn encoded_field_hits_pinned_values() {
        // Horizontal stroke along y = 40 in a 64x81 canvas: the field is 8 on
        // the stroke, 4 at 16 px, and 0 from 32 px away.
        let line = Polyline::new(vec![Point::new(0.0, 40.0), Point::new(63.0, 40.0)]).unwrap();
        let field = inverse_threshold_dt(&[line], 64, 81).unwrap();
        assert!((field.grid().get(10, 40) - 8.0).abs() < 1e-12);
        assert!((field.grid().get(10, 24) - 4.0).abs() < 1e-12);
        assert!((field.grid().get(10, 56) - 4.0).abs() < 1e-12);
        assert_eq!(*field.grid().get(10, 8), 0.0);
        assert_eq!(*field.grid().get(10, 72), 0.0);
        // One pixel off the stroke: d = 1 → 8 * 31/32.
        assert!((field.grid().get(10, 41) - 8.0 * 31.0 / 32.0).abs() < 1e-12);
    }

    #[test]
    fn empty_polyline_list_is_rejected() {
        assert!(inverse_threshold_dt(&[], 8, 8).is_err());
    }

    #[test]
    fn encode_distance_clamps_both_ends() {
        assert_eq!(encode_distance(0.0), 8.0);
        assert_eq!(encode_distance(32.0), 0.0);
        assert_eq!(encode_distance(100.0), 0.0);
        assert_eq!(encode_distance(-10.0), 10.0); // clamped at the top
    }

    // ── binarize ──

    #[test]
    fn binarize_uses_inclusive_threshold() {
        let mut grid = Grid::filled(3, 1, 0.0);
        *grid.get_mut(0, 0) = 3.9999;
        *grid.get_mut(1, 0) = 4.0;
        *grid.get_mut(2, 0) = 4.0001;
        let field = DistanceField::new(grid).unwrap();
        let mask = binarize(&field, 4.0).unwrap();
        assert!(!mask.is_set(0, 0));
        assert!(mask.is_set(1, 0));
        assert!(mask.is_set(2, 0));
    }

    #[test]
    fn binarize_rejects_out_of_range_thresholds() {
        let field = DistanceField::new(Grid::filled(2, 2, 1.0)).unwrap();
        assert!(binarize(&field, 0.0).is_err());
        assert!(binarize(&field, 10.0).is_err());
        assert!(binarize(&field, -1.0).is_err());
    }

    // ── skeletonize / endpoints ──

    #[test]
    fn thick_bar_thins_to_unit_width_line() {
        let mut mask = BinaryMask::empty(20, 7);
        for x in 0..20 {
            for y in 2..5 {
                mask.set(x, y);
            }
        }
        let skel = skeletonize(&mask);
        // Unit width away from the tips (the scheme erodes line ends by a
        // pixel or two); no column may hold more than one skeleton pixel.
        for x in 0..20i64 {
            let count = (0..7i64).filter(|&y| skel.is_set(x, y)).count();
            assert!(count <= 1, "column {x} has {count} pixels");
            if (2..18).contains(&x) {
                assert_eq!(count, 1, "column {x}");
            }
        }
        let endpoints = skeleton_endpoints(&skel);
        assert_eq!(endpoints.len(), 2);
    }

    #[test]
    fn y_shaped_skeleton_has_three_endpoints() {
        let mask = mask_from_rows(&[
            "#.......#",
            ".#.....#.",
            "..#...#..",
            "...#.#...",
            "....#....",
            "....#....",
            "....#....",
            "....#....",
        ]);
        // Already unit-width; thinning must not disconnect it.
        let skel = skeletonize(&mask);
        let (_, components) = connected_components(&skel);
        assert_eq!(components, 1);
        assert_eq!(skeleton_endpoints(&skel).len(), 3);
    }

    #[test]
    fn closed_ring_has_no_endpoints() {
        let mask = mask_from_rows(&[
            "#####",
            "#...#",
            "#...#",
            "#####",
        ]);
        let skel = skeletonize(&mask);
        assert!(skel.count_set() > 0, "ring must not vanish");
        assert!(skeleton_endpoints(&skel).is_empty());
    }

    #[test]
    fn endpoints_are_reported_in_scan_order() {
        let mask = mask_from_rows(&[
            ".....",
            ".###.",
            ".....",
        ]);
        let endpoints = skeleton_endpoints(&mask);
        assert_eq!(endpoints, vec![(1, 1), (3, 1)]);
    }

    proptest! {
        #[test]
        fn skeleton_is_unit_width_and_preserves_connectivity(
            strokes in proptest::collection::vec(
                ((0i64..30, 0i64..20), (0i64..30, 0i64..20)), 1..5),
        ) {
            // Random thick strokes: lines dilated by their 8-neighborhood.
            let mut mask = BinaryMask::empty(30, 20);
            for (a, b) in strokes {
                bresenham(a, b, |x, y| {
                    for dy in -1..=1 {
                        for dx in -1..=1 {
                            mask.set(x + dx, y + dy);
                        }
                    }
                });
            }
            prop_assume!(mask.count_set() > 0);
            let (_, before) = connected_components(&mask);
            let skel = skeletonize(&mask);
            let (_, after) = connected_components(&skel);
            // Connectivity is preserved...
            prop_assert_eq!(before, after);
            // ...and no pixel keeps a fully-set 3x3 neighborhood.
            for (x, y) in skel.iter_set() {
                prop_assert!(
                    skel.neighbor_count(x as i64, y as i64) < 8,
                    "interior pixel survived at ({}, {})", x, y
                );
            }
        }
    }

    // ── components ──

    #[test]
    fn components_are_labeled_in_first_encounter_order() {
        let mask = mask_from_rows(&[
            "#..#",
            "#...",
            "...#",
        ]);
        let (labels, count) = connected_components(&mask);
        assert_eq!(count, 3);
        assert_eq!(*labels.get(0, 0), 1);
        assert_eq!(*labels.get(3, 0), 2);
        assert_eq!(*labels.get(0, 1), 1);
        // (3, 2) is 8-adjacent to nothing else.
        assert_eq!(*labels.get(3, 2), 3);
    }
}
