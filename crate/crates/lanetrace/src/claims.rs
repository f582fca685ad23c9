//! Bookkeeping of already-traced boundary pixels.
//!
//! Every segment appended during discovery is stamped into a [`ClaimGrid`]
//! under its chain's numeric id. The grid answers the three questions the
//! tracing loop keeps asking:
//!
//! * is this pixel on a traced corridor, and whose is it ([`ClaimGrid::owner`]) —
//!   used to hide other boundaries from the state analysis;
//! * is this pixel too close to *any* traced corridor to be a useful next
//!   vertex ([`ClaimGrid::is_blocked`]) — a slightly dilated corridor that
//!   keeps the position prediction from crawling back over its own trail or
//!   stalling a fraction of a pixel ahead of it;
//! * how close is the nearest pixel traced by a *different* chain
//!   ([`ClaimGrid::nearest_other_claim`]) — the merge test.
//!
//! Stamps are first-writer-wins so a later chain brushing against an earlier
//! one never repaints history; replaying a finished graph therefore rebuilds
//! the exact same grid.

use crate::geom::Point;
use crate::grid::Grid;
use crate::raster::bresenham;

/// Corridor half-width in pixels: a stamped segment claims the line plus its
/// 8-neighborhood (3 px wide in total).
const CORRIDOR_RADIUS: i64 = 1;

/// Dilation radius (pixels, Euclidean) of the blocked mask around stamped
/// corridors. Position candidates inside it are suppressed, which guarantees
/// each accepted step clears the previous vertex by a couple of pixels.
const BLOCKED_RADIUS: i64 = 3;

/// Per-pixel record of which chain (if any) traced each location.
#[derive(Debug, Clone)]
pub struct ClaimGrid {
    ids: Grid<u32>,
    blocked: Grid<bool>,
}

impl ClaimGrid {
    /// An all-unclaimed grid of the given dimensions.
    pub fn new(width: usize, height: usize) -> Self {
        ClaimGrid { ids: Grid::filled(width, height, 0), blocked: Grid::filled(width, height, false) }
    }

    pub fn width(&self) -> usize {
        self.ids.width()
    }

    pub fn height(&self) -> usize {
        self.ids.height()
    }

    /// Chain id claiming the pixel, or 0 when unclaimed or out of bounds.
    pub fn owner(&self, x: i64, y: i64) -> u32 {
        self.ids.get_or(x, y, 0)
    }

    /// Whether the pixel lies within the dilated corridor of any stamp.
    /// Out-of-bounds pixels are not blocked (they are rejected elsewhere).
    pub fn is_blocked(&self, x: i64, y: i64) -> bool {
        self.blocked.get_or(x, y, false)
    }

    /// Number of claimed pixels (corridor cells, not the dilated mask).
    pub fn claimed_count(&self) -> usize {
        self.ids.raw().iter().filter(|&&id| id != 0).count()
    }

    /// Stamps the segment from `a` to `b` for chain `id`: a 3-px-wide
    /// corridor of ownership plus the wider blocked dilation. Existing
    /// ownership is never overwritten. `id` must be nonzero.
    pub fn stamp_segment(&mut self, a: Point, b: Point, id: u32) {
        debug_assert!(id != 0, "chain ids start at 1; 0 means unclaimed");
        let ax = a.x.round() as i64;
        let ay = a.y.round() as i64;
        let bx = b.x.round() as i64;
        let by = b.y.round() as i64;
        bresenham((ax, ay), (bx, by), |px, py| {
            for dy in -BLOCKED_RADIUS..=BLOCKED_RADIUS {
                for dx in -BLOCKED_RADIUS..=BLOCKED_RADIUS {
                    if dx * dx + dy * dy > BLOCKED_RADIUS * BLOCKED_RADIUS {
                        continue;
                    }
                    let (x, y) = (px + dx, py + dy);
                    if !self.ids.contains(x, y) {
                        continue;
                    }
                    let (x, y) = (x as usize, y as usize);
                    *self.blocked.get_mut(x, y) = true;
                    if dx.abs() <= CORRIDOR_RADIUS && dy.abs() <= CORRIDOR_RADIUS {
                        let cell = self.ids.get_mut(x, y);
                        if *cell == 0 {
                            *cell = id;
                        }
                    }
                }
            }
        });
    }

    /// Stamps a single vertex (used for chain roots before any segment).
    pub fn stamp_dot(&mut self, p: Point, id: u32) {
        self.stamp_segment(p, p, id);
    }

    /// Distance from `center` to the nearest pixel claimed by a chain other
    /// than `own`, searching within `radius` pixels. `None` when no such
    /// pixel exists in range.
    pub fn nearest_other_claim(&self, center: Point, radius: f64, own: u32) -> Option<f64> {
        let r = radius.ceil() as i64;
        let cx = center.x.round() as i64;
        let cy = center.y.round() as i64;
        let mut best: Option<f64> = None;
        for y in (cy - r)..=(cy + r) {
            for x in (cx - r)..=(cx + r) {
                let id = self.owner(x, y);
                if id == 0 || id == own {
                    continue;
                }
                let d = center.distance(Point::new(x as f64, y as f64));
                if d <= radius && best.is_none_or(|b| d < b) {
                    best = Some(d);
                }
            }
        }
        best
    }
}
