//! Lane-boundary topology extraction from bird's-eye-view intensity rasters.
//!
//! The crate models a road scene's lane boundaries as a directed acyclic
//! graph of sparse vertices and recovers that graph from imagery by greedy
//! sequential decoding: starting from seed points on the distance-transform
//! ridge of the boundary evidence, a trio of local predictors repeatedly
//! answers *which direction does the boundary continue*, *where exactly is
//! the next vertex*, and *does the boundary continue, split, or end here*.
//! Splits enqueue the branch point so the second branch is traced later;
//! merges terminate the dying boundary on contact with an already-traced one.
//!
//! Module map:
//!
//! - [`geom`]: points, canonical angles, polylines, rotated RoIs, bilinear
//!   sampling, densification.
//! - [`raster`]: intensity rasters, the exact Euclidean distance transform,
//!   the thresholded inverse distance-field encoding, thinning and skeleton
//!   analysis.
//! - [`store`]: on-disk formats (16-bit grayscale PNG + JSON sidecar,
//!   deterministic JSON).
//! - [`dag`]: the lane-graph representation, structural validation,
//!   polyline extraction, and the decode log-score.
//! - [`headers`]: the three local predictors (direction, position, state),
//!   implemented as deterministic distance-field oracles.
//! - [`inference`]: seeding, the greedy decode loop, and coverage-gap
//!   recovery.
//! - [`synth`]: procedural highway scenes with forks/merges plus ground
//!   truth, for benchmarks and tests.
//! - [`losses`]: training-style objectives (Chamfer, cosine, normalized
//!   focal, field MSE) with analytic gradients.
//! - [`eval`]: precision/recall/F1 at pixel thresholds and per-boundary
//!   topology correctness.

pub mod claims;
pub mod dag;
pub mod error;
pub mod eval;
pub mod geom;
pub mod grid;
pub mod headers;
pub mod inference;
pub mod losses;
pub mod raster;
pub mod store;
pub mod synth;

pub use error::{Error, Result};
