//! Terrain capture planning with epsilon-orthographic regions.
//!
//! The crate follows one pipeline from raw terrain to a divided capture plan:
//!
//! 1. [`terrain`]: elevation maps, analytic test surfaces and the unified
//!    [`SurfaceModel`] query interface (elevation, gradient, Hessian, normal).
//! 2. [`diffgeo`]: Gaussian/mean curvature, imaging surfaces and curves at a
//!    working distance `d`, and the 1D maximum-height bound.
//! 3. [`ortho`]: exact epsilon-orthographic regions and their polygonal,
//!    elliptical and circular approximations.
//! 4. [`plan`]: cost functions, overlap geometry, pattern-search solvers,
//!    batch/sequential circle filling, coverage metrics and Pareto sweeps.
//! 5. [`partition`]: nearest-center division of the covered surface.
//!
//! [`svg`] and [`grid`] hold the deterministic output formats shared by the CLI.

// Parameter checks use `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod diffgeo;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod grid;
pub mod ortho;
pub mod partition;
pub mod plan;
pub mod svg;
pub mod terrain;

pub use error::{Error, Result};
pub use geometry::Bounds;
pub use terrain::{AnalyticSurface, HeightField, SurfaceFn, SurfaceModel, SurfaceQuery};
