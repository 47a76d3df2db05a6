//! Epsilon-orthographic regions and their approximations.
//!
//! A point `P′` near the center `P₀` belongs to the region when both
//!
//! * `θ = atan(|P′ − P₀|_xy / d) ≤ ε` (it lies inside the useful field of view), and
//! * `φ ≤ ε`, where `φ` is the angle between the surface normals at `P₀` and `P′`.
//!
//! The θ test alone bounds every region by the disk of radius `R = d·tan ε`.

use serde::{Deserialize, Serialize};

use crate::curve::{CurveFn, Domain};
use crate::diffgeo::gaussian_curvature;
use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, MaskedGrid};
use crate::terrain::SurfaceModel;

/// Polygon resolution used when none is given.
pub const DEFAULT_POLYGON_SIDES: usize = 16;
/// Ratio between the largest and smallest curvature-driven radius.
pub const DEFAULT_RADIUS_RATIO: f64 = 5.0;
/// Empty rings tolerated before the surface march stops.
const MAX_EMPTY_RINGS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthoParams {
    /// Imaging height along the normal.
    pub d: f64,
    /// Angular field of view, radians.
    pub eps: f64,
    pub dx: f64,
    pub dy: f64,
    /// `r_max / r_min` for the curvature-driven radius.
    #[serde(default = "default_m")]
    pub m: f64,
    /// Predict neighbouring gradients from the center Hessian instead of
    /// evaluating them.
    #[serde(default)]
    pub linearized: bool,
}

fn default_m() -> f64 {
    DEFAULT_RADIUS_RATIO
}

impl OrthoParams {
    pub fn new(d: f64, eps: f64, dx: f64, dy: f64) -> Result<Self> {
        let p = Self {
            d,
            eps,
            dx,
            dy,
            m: DEFAULT_RADIUS_RATIO,
            linearized: false,
        };
        p.validate()?;
        Ok(p)
    }

    /// March steps of `R / steps_per_radius` in both directions.
    pub fn with_resolution(d: f64, eps: f64, steps_per_radius: f64) -> Result<Self> {
        let step = d * eps.tan() / steps_per_radius;
        Self::new(d, eps, step, step)
    }

    pub fn with_m(mut self, m: f64) -> Result<Self> {
        self.m = m;
        self.validate()?;
        Ok(self)
    }

    pub fn linearized(mut self, on: bool) -> Self {
        self.linearized = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(invalid(format!(
                "imaging height d must be positive, got {}",
                self.d
            )));
        }
        if !(self.eps > 0.0 && self.eps < std::f64::consts::FRAC_PI_2) {
            return Err(invalid(format!(
                "eps must lie in (0, pi/2), got {}",
                self.eps
            )));
        }
        if !(self.dx > 0.0 && self.dy > 0.0 && self.dx.is_finite() && self.dy.is_finite()) {
            return Err(invalid("march resolutions dx, dy must be positive"));
        }
        if !(self.m >= 1.0 && self.m.is_finite()) {
            return Err(invalid(format!(
                "radius ratio m must be >= 1, got {}",
                self.m
            )));
        }
        Ok(())
    }

    /// Field-of-view radius `R = d·tan ε`.
    pub fn radius(&self) -> f64 {
        self.d * self.eps.tan()
    }

    fn theta_ok(&self, lateral: f64) -> bool {
        (lateral / self.d).atan() <= self.eps
    }
}

/// An epsilon-orthographic region, exact or approximated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionBoundary {
    /// Accepted lattice cells around the center. `data` holds the elevation
    /// of each cell (0 outside the surface bounds).
    Mask {
        center: [f64; 2],
        mask: MaskedGrid,
    },
    Polygon {
        center: [f64; 2],
        vertices: Vec<[f64; 2]>,
    },
    /// `major` and `minor` are full axis lengths; `angle` orients the major
    /// axis, radians from +x.
    Ellipse {
        center: [f64; 2],
        major: f64,
        minor: f64,
        angle: f64,
    },
    Circle {
        center: [f64; 2],
        radius: f64,
    },
}

impl RegionBoundary {
    pub fn center(&self) -> [f64; 2] {
        match self {
            RegionBoundary::Mask { center, .. }
            | RegionBoundary::Polygon { center, .. }
            | RegionBoundary::Ellipse { center, .. }
            | RegionBoundary::Circle { center, .. } => *center,
        }
    }

    /// Cells of a mask region, `None` for the other variants.
    pub fn cell_count(&self) -> Option<usize> {
        match self {
            RegionBoundary::Mask { mask, .. } => {
                Some(mask.valid.iter().filter(|&&v| v == 1).count())
            }
            _ => None,
        }
    }

    /// Largest distance from the center to a point of the region.
    pub fn extent(&self) -> f64 {
        let c = self.center();
        let far = |p: &[f64; 2]| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
        match self {
            RegionBoundary::Mask { mask, .. } => {
                let g = &mask.grid;
                let mut best = 0.0_f64;
                for i in 0..g.rows {
                    for j in 0..g.cols {
                        if mask.valid[i * g.cols + j] == 1 {
                            best = best.max(far(&[g.x_of(j), g.y_of(i)]));
                        }
                    }
                }
                best
            }
            RegionBoundary::Polygon { vertices, .. } => {
                vertices.iter().map(far).fold(0.0, f64::max)
            }
            RegionBoundary::Ellipse { major, .. } => 0.5 * major,
            RegionBoundary::Circle { radius, .. } => *radius,
        }
    }
}

/// Angle between the upward normals `[-p, -q, 1]` and `[-p′, -q′, 1]`.
pub fn normal_angle(p: f64, q: f64, p1: f64, q1: f64) -> f64 {
    let a = [-p, -q, 1.0];
    let b = [-p1, -q1, 1.0];
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    sin.atan2(cos)
}

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

/// Left and right ends of the region around `x0` on `y = f(x)`, marching in
/// steps of `dx` and clamped to `domain`.
pub fn curve_ortho_bounds(
    f: &CurveFn,
    domain: Domain,
    x0: f64,
    params: &OrthoParams,
) -> Result<(f64, f64)> {
    params.validate()?;
    if !domain.contains(x0) {
        return Err(Error::OutOfBounds { x: x0, y: 0.0 });
    }
    let p0 = f.derivative(x0);
    let f2 = if params.linearized {
        f.second_derivative(x0)
    } else {
        0.0
    };
    let accepts = |x: f64| {
        let p = if params.linearized {
            p0 + (x - x0) * f2
        } else {
            f.derivative(x)
        };
        params.theta_ok((x - x0).abs()) && normal_angle(p0, 0.0, p, 0.0) <= params.eps
    };
    let march = |dir: f64| {
        let mut last = x0;
        for k in 1.. {
            let x = x0 + dir * k as f64 * params.dx;
            if !domain.contains(x) || !accepts(x) {
                break;
            }
            last = x;
        }
        last
    };
    Ok((march(-1.0), march(1.0)))
}

// ---------------------------------------------------------------------------
// Surfaces
// ---------------------------------------------------------------------------

/// Lattice offsets `(n1, n2)` with `|n1| + |n2| = n`, counter-clockwise from
/// `(n, 0)`.
pub fn pair_gen(n: i64) -> Result<Vec<(i64, i64)>> {
    if n < 1 {
        return Err(invalid(format!("ring index must be >= 1, got {n}")));
    }
    let mut out = Vec::with_capacity(4 * n as usize);
    for k in 0..n {
        out.push((n - k, k));
    }
    for k in 0..n {
        out.push((-k, n - k));
    }
    for k in 0..n {
        out.push((-(n - k), -k));
    }
    for k in 0..n {
        out.push((k, -(n - k)));
    }
    Ok(out)
}

/// Membership test for candidate points around a fixed center.
struct Acceptor<'a> {
    model: &'a SurfaceModel,
    params: &'a OrthoParams,
    center: [f64; 2],
    p0: f64,
    q0: f64,
    hessian: [[f64; 2]; 2],
}

impl<'a> Acceptor<'a> {
    fn new(model: &'a SurfaceModel, center: [f64; 2], params: &'a OrthoParams) -> Result<Self> {
        params.validate()?;
        let s = model.query(center[0], center[1])?;
        Ok(Self {
            model,
            params,
            center,
            p0: s.p,
            q0: s.q,
            hessian: s.hessian,
        })
    }

    fn accepts(&self, x: f64, y: f64) -> bool {
        if !self.model.bounds().contains(x, y) {
            return false;
        }
        let (dx, dy) = (x - self.center[0], y - self.center[1]);
        if !self.params.theta_ok(dx.hypot(dy)) {
            return false;
        }
        let (p, q) = if self.params.linearized {
            let h = self.hessian;
            (
                self.p0 + h[0][0] * dx + h[0][1] * dy,
                self.q0 + h[1][0] * dx + h[1][1] * dy,
            )
        } else {
            self.model.gradient_unchecked(x, y)
        };
        normal_angle(self.p0, self.q0, p, q) <= self.params.eps
    }
}

/// Exact region around `center` by ring expansion over the `(dx, dy)`
/// lattice. The march stops once more than three rings have come up empty.
pub fn surface_ortho_region(
    model: &SurfaceModel,
    center: [f64; 2],
    params: &OrthoParams,
) -> Result<RegionBoundary> {
    let acc = Acceptor::new(model, center, params)?;
    let b = model.bounds();
    let max_ring = (b.width() / params.dx).max(b.height() / params.dy).ceil() as i64;

    let mut cells = vec![(0_i64, 0_i64)];
    let mut empty = 0;
    for n in 1..=max_ring.max(1) {
        let mut count = 0;
        for (a, c) in pair_gen(n)? {
            let x = center[0] + params.dx * a as f64;
            let y = center[1] + params.dy * c as f64;
            if acc.accepts(x, y) {
                cells.push((a, c));
                count += 1;
            }
        }
        if count == 0 {
            empty += 1;
        }
        if empty > MAX_EMPTY_RINGS {
            break;
        }
    }

    let (jmin, jmax) = cells
        .iter()
        .fold((0, 0), |(lo, hi), c| (lo.min(c.0), hi.max(c.0)));
    let (imin, imax) = cells
        .iter()
        .fold((0, 0), |(lo, hi), c| (lo.min(c.1), hi.max(c.1)));
    let cols = (jmax - jmin + 1) as usize;
    let rows = (imax - imin + 1) as usize;
    let origin = [
        center[0] + params.dx * jmin as f64,
        center[1] + params.dy * imin as f64,
    ];
    let mut valid = vec![0_u8; rows * cols];
    for &(a, c) in &cells {
        valid[(c - imin) as usize * cols + (a - jmin) as usize] = 1;
    }
    let mut data = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let x = origin[0] + params.dx * j as f64;
            let y = origin[1] + params.dy * i as f64;
            if b.contains(x, y) {
                data[i * cols + j] = model.elevation(x, y)?;
            }
        }
    }
    let grid = Grid::with_geometry(rows, cols, [params.dx, params.dy], origin, data)?;
    Ok(RegionBoundary::Mask {
        center,
        mask: MaskedGrid { grid, valid },
    })
}

/// Ray-marched polygon with `n` equiangular vertices, counter-clockwise from
/// the +x direction. Each vertex is the last accepted point on its ray.
pub fn approx_polygonal(
    model: &SurfaceModel,
    center: [f64; 2],
    params: &OrthoParams,
    n: usize,
) -> Result<RegionBoundary> {
    if n < 3 {
        return Err(invalid(format!(
            "polygon needs at least 3 directions, got {n}"
        )));
    }
    let acc = Acceptor::new(model, center, params)?;
    let step = params.dx.min(params.dy);
    // Rays cannot leave the field-of-view disk, so this bounds every march.
    let max_steps = (params.radius() / step).ceil() as usize + 1;
    let vertices = (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            let (s, c) = a.sin_cos();
            let mut last = center;
            for i in 1..=max_steps {
                let t = step * i as f64;
                let pt = [center[0] + t * c, center[1] + t * s];
                if !acc.accepts(pt[0], pt[1]) {
                    break;
                }
                last = pt;
            }
            last
        })
        .collect();
    Ok(RegionBoundary::Polygon { center, vertices })
}

/// Ellipse through the longest diagonal of an even polygon. Diagonals join
/// vertex `i` to vertex `i + N/2`; the minor axis is the shortest diagonal.
pub fn approx_elliptical(polygon: &RegionBoundary) -> Result<RegionBoundary> {
    let RegionBoundary::Polygon { vertices, .. } = polygon else {
        return Err(invalid("elliptical approximation needs a polygon"));
    };
    let n = vertices.len();
    if n < 4 || n % 2 != 0 {
        return Err(invalid(format!(
            "elliptical approximation needs an even N >= 4, got {n}"
        )));
    }
    let half = n / 2;
    let diag = |i: usize| {
        let (a, b) = (vertices[i], vertices[i + half]);
        ((b[0] - a[0]).hypot(b[1] - a[1]), a, b)
    };
    let mut longest = diag(0);
    let mut shortest = longest.0;
    for i in 1..half {
        let d = diag(i);
        shortest = shortest.min(d.0);
        if d.0 > longest.0 {
            longest = d;
        }
    }
    let (major, a, b) = longest;
    let mut angle = (b[1] - a[1]).atan2(b[0] - a[0]);
    // Axis direction is only defined modulo pi.
    if angle < 0.0 {
        angle += std::f64::consts::PI;
    }
    if angle >= std::f64::consts::PI {
        angle -= std::f64::consts::PI;
    }
    Ok(RegionBoundary::Ellipse {
        center: [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
        major,
        minor: shortest,
        angle: if major > 0.0 { angle } else { 0.0 },
    })
}

/// Circle at the polygon center whose radius is the mean vertex distance.
pub fn approx_circular_avg(polygon: &RegionBoundary) -> Result<RegionBoundary> {
    let RegionBoundary::Polygon { center, vertices } = polygon else {
        return Err(invalid("circular approximation needs a polygon"));
    };
    if vertices.len() < 3 {
        return Err(invalid("circular approximation needs at least 3 vertices"));
    }
    let sum: f64 = vertices
        .iter()
        .map(|v| (v[0] - center[0]).hypot(v[1] - center[1]))
        .sum();
    Ok(RegionBoundary::Circle {
        center: *center,
        radius: sum / vertices.len() as f64,
    })
}

/// `r = R − |K|/Kmax · R · (1 − 1/m)`, clamped to `[R/m, R]`. A flat surface
/// (`Kmax = 0`) gets the full radius.
pub fn radius_from_curvature(k: f64, kmax: f64, big_r: f64, m: f64) -> f64 {
    if kmax <= 0.0 {
        return big_r;
    }
    let t = (k.abs() / kmax).min(1.0);
    (big_r - t * big_r * (1.0 - 1.0 / m)).clamp(big_r / m, big_r)
}

pub fn approx_radius_curvature(
    model: &SurfaceModel,
    at: [f64; 2],
    params: &OrthoParams,
    kmax: f64,
) -> Result<f64> {
    params.validate()?;
    if !(kmax >= 0.0) {
        return Err(invalid(format!("Kmax must be non-negative, got {kmax}")));
    }
    let k = gaussian_curvature(model, at[0], at[1])?;
    Ok(radius_from_curvature(k, kmax, params.radius(), params.m))
}
