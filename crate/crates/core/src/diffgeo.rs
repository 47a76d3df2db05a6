//! Curvature, imaging surfaces/curves and the 1D working-height bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{CurveFn, Domain};
use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::terrain::{SurfaceModel, SurfaceQuery};

/// Default lattice used to estimate the maximum absolute Gaussian curvature.
pub const DEFAULT_KMAX_RES: usize = 201;

/// Gaussian curvature `K = (fxx·fyy − fxy²) / (1 + p² + q²)²`.
pub fn gaussian_from_query(s: &SurfaceQuery) -> f64 {
    let [[fxx, fxy], [_, fyy]] = s.hessian;
    let w = 1.0 + s.p * s.p + s.q * s.q;
    (fxx * fyy - fxy * fxy) / (w * w)
}

/// Mean curvature `H = ((1+p²)fyy + (1+q²)fxx − 2pq·fxy) / (2(1 + p² + q²)^{3/2})`.
///
/// With the upward normal, a bowl has `H > 0` and a peak has `H < 0`.
pub fn mean_from_query(s: &SurfaceQuery) -> f64 {
    let [[fxx, fxy], [_, fyy]] = s.hessian;
    let (p, q) = (s.p, s.q);
    let w = 1.0 + p * p + q * q;
    ((1.0 + p * p) * fyy + (1.0 + q * q) * fxx - 2.0 * p * q * fxy) / (2.0 * w.powf(1.5))
}

pub fn gaussian_curvature(model: &SurfaceModel, x: f64, y: f64) -> Result<f64> {
    Ok(gaussian_from_query(&model.query(x, y)?))
}

pub fn mean_curvature(model: &SurfaceModel, x: f64, y: f64) -> Result<f64> {
    Ok(mean_from_query(&model.query(x, y)?))
}

/// Unsigned curvature of the graph `y = f(x)`: `|f″| / (1 + f′²)^{3/2}`.
pub fn curve_curvature(f: &CurveFn, x: f64) -> f64 {
    let d1 = f.derivative(x);
    (f.second_derivative(x)).abs() / (1.0 + d1 * d1).powf(1.5)
}

/// Gaussian and mean curvature sampled on a lattice over the surface bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureField {
    pub gaussian: Grid,
    pub mean: Grid,
    pub kmax: f64,
}

pub fn curvature_field(model: &SurfaceModel, res: usize) -> Result<CurvatureField> {
    if res < 2 {
        return Err(invalid("curvature grid needs at least 2 samples per axis"));
    }
    let b = model.bounds();
    let pts = b.lattice(res, res);
    let (k, h): (Vec<f64>, Vec<f64>) = pts
        .par_iter()
        .map(|&[x, y]| {
            let q = model.query_unchecked(x, y);
            (gaussian_from_query(&q), mean_from_query(&q))
        })
        .unzip();
    if let Some(i) = k.iter().chain(&h).position(|v| !v.is_finite()) {
        let [x, y] = pts[i % pts.len()];
        return Err(Error::NonFinite(format!("curvature at ({x}, {y})")));
    }
    let gaussian = Grid::over_bounds(&b, res, res, k)?;
    let kmax = gaussian.max_abs();
    Ok(CurvatureField {
        gaussian,
        mean: Grid::over_bounds(&b, res, res, h)?,
        kmax,
    })
}

/// `max |K|` over a `res × res` lattice of the bounds.
pub fn max_abs_gaussian_curvature(model: &SurfaceModel, res: usize) -> Result<f64> {
    Ok(curvature_field(model, res)?.kmax)
}

// ---------------------------------------------------------------------------
// Imaging surfaces
// ---------------------------------------------------------------------------

/// Points at distance `d` along the upward unit normal of every lattice sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImagingSurface {
    pub rows: usize,
    pub cols: usize,
    pub spacing: [f64; 2],
    pub origin: [f64; 2],
    pub d: f64,
    /// Image-point elevations `z′`.
    pub data: Vec<f64>,
    pub x_image: Vec<f64>,
    pub y_image: Vec<f64>,
    /// 1 where the image point is on or above the surface.
    pub valid: Vec<u8>,
}

impl ImagingSurface {
    pub fn point(&self, k: usize) -> [f64; 3] {
        [self.x_image[k], self.y_image[k], self.data[k]]
    }

    pub fn is_valid(&self, k: usize) -> bool {
        self.valid[k] == 1
    }
}

/// `z′ ≥ f(x′, y′)`, up to rounding. Where the surface is undefined at the
/// image point there is nothing to collide with.
fn above_surface(z_img: f64, surface_z: f64) -> bool {
    !surface_z.is_finite() || z_img >= surface_z - 1e-9 * (1.0 + surface_z.abs())
}

pub fn imaging_surface(model: &SurfaceModel, d: f64, res: usize) -> Result<ImagingSurface> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(invalid(format!("imaging height must be positive, got {d}")));
    }
    if res < 2 {
        return Err(invalid("imaging surface needs at least 2 samples per axis"));
    }
    let b = model.bounds();
    let pts = b.lattice(res, res);
    let samples: Vec<([f64; 3], bool)> = pts
        .par_iter()
        .map(|&[x, y]| {
            let s = model.query_unchecked(x, y);
            let w = (s.p * s.p + s.q * s.q + 1.0).sqrt();
            let img = [x - d * s.p / w, y - d * s.q / w, s.z + d / w];
            let ok = above_surface(img[2], model.elevation_extended(img[0], img[1]));
            (img, ok)
        })
        .collect();
    let grid = Grid::over_bounds(&b, res, res, vec![0.0; res * res])?;
    Ok(ImagingSurface {
        rows: res,
        cols: res,
        spacing: grid.spacing,
        origin: grid.origin,
        d,
        data: samples.iter().map(|s| s.0[2]).collect(),
        x_image: samples.iter().map(|s| s.0[0]).collect(),
        y_image: samples.iter().map(|s| s.0[1]).collect(),
        valid: samples.iter().map(|s| s.1 as u8).collect(),
    })
}

// ---------------------------------------------------------------------------
// Imaging curves and the height bound
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveImage {
    pub x: f64,
    pub x_image: f64,
    pub y_image: f64,
    pub valid: bool,
}

pub fn image_point(f: &CurveFn, x: f64, d: f64) -> CurveImage {
    let slope = f.derivative(x);
    let w = (1.0 + slope * slope).sqrt();
    let x_image = x - d * slope / w;
    let y_image = f.value(x) + d / w;
    CurveImage {
        x,
        x_image,
        y_image,
        valid: above_surface(y_image, f.value(x_image)),
    }
}

/// Image of `res` evenly spaced samples of `f` over `domain`.
pub fn imaging_curve(f: &CurveFn, d: f64, domain: Domain, res: usize) -> Result<Vec<CurveImage>> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(invalid(format!("imaging height must be positive, got {d}")));
    }
    if res < 2 {
        return Err(invalid("imaging curve needs at least 2 samples"));
    }
    Ok(domain.samples(res).map(|x| image_point(f, x, d)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HeightBound {
    /// Largest valid height, within the bisection tolerance.
    Bounded { d: f64 },
    /// No invalid image point at the cap height.
    Unbounded { cap: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeightBoundOptions {
    pub tol: f64,
    pub cap: f64,
    pub resolution: usize,
}

impl Default for HeightBoundOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            cap: 100.0,
            resolution: 2000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeightBoundReport {
    pub bound: HeightBound,
    /// `[L, U]` after every bisection step.
    pub brackets: Vec<[f64; 2]>,
}

/// True when every sampled image point at height `d` lies on or above `f`.
///
/// The sample spacing shrinks with `d` (at least 20 samples per unit of `d`)
/// so thin invalid bands near kinks are still seen at small heights.
pub fn curve_valid_at(f: &CurveFn, domain: Domain, d: f64, resolution: usize) -> bool {
    const MAX_SAMPLES: usize = 4_000_000;
    let adaptive = (domain.width() * 20.0 / d).ceil();
    let n = if adaptive.is_finite() {
        resolution.max(adaptive as usize).min(MAX_SAMPLES)
    } else {
        MAX_SAMPLES
    };
    domain.samples(n).all(|x| image_point(f, x, d).valid)
}

/// Upper bound on the working height for the curve `f` over `domain`, by
/// bisection on `d ∈ [0, cap]`.
pub fn max_valid_height_1d(
    f: &CurveFn,
    domain: Domain,
    opts: HeightBoundOptions,
) -> Result<HeightBoundReport> {
    if !(opts.tol > 0.0) || !(opts.cap > 0.0) || opts.resolution < 2 {
        return Err(invalid(
            "height bound needs tol > 0, cap > 0 and resolution >= 2",
        ));
    }
    if let Some(x) = domain
        .samples(opts.resolution)
        .find(|&x| !f.value(x).is_finite())
    {
        return Err(Error::NonFinite(format!("curve value at x = {x}")));
    }
    if curve_valid_at(f, domain, opts.cap, opts.resolution) {
        return Ok(HeightBoundReport {
            bound: HeightBound::Unbounded { cap: opts.cap },
            brackets: Vec::new(),
        });
    }
    let (mut lo, mut hi) = (0.0_f64, opts.cap);
    let mut brackets = vec![[lo, hi]];
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        if curve_valid_at(f, domain, mid, opts.resolution) {
            lo = mid;
        } else {
            hi = mid;
        }
        brackets.push([lo, hi]);
    }
    // No valid positive height was ever found.
    let d = if lo == 0.0 { 0.0 } else { 0.5 * (lo + hi) };
    Ok(HeightBoundReport {
        bound: HeightBound::Bounded { d },
        brackets,
    })
}
