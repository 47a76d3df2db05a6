//! Terrain ingestion and the unified surface query interface.
//!
//! A [`SurfaceModel`] is backed either by a [`HeightField`] (an elevation map,
//! queried through bilinear interpolation of precomputed derivative grids) or
//! by an [`AnalyticSurface`] (a closed-form preset or a parsed expression).

use std::io::Cursor;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::expr::Expr;
use crate::geometry::Bounds;
use crate::grid::Grid;

/// Relative step for first-derivative central differences.
pub const FD_STEP: f64 = 1e-5;
/// Relative step for second-derivative central differences.
pub const FD_STEP_2ND: f64 = 1e-4;

/// Default mean-smoothing window for elevation maps.
pub const DEFAULT_SMOOTH_WINDOW: usize = 17;

// ---------------------------------------------------------------------------
// Heightfields
// ---------------------------------------------------------------------------

/// A validated elevation grid: at least 2×2, all values finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Grid", into = "Grid")]
pub struct HeightField {
    grid: Grid,
}

impl HeightField {
    pub fn new(rows: usize, cols: usize, elevations: Vec<f64>) -> Result<Self> {
        Self::from_grid(Grid::new(rows, cols, elevations)?)
    }

    pub fn from_grid(grid: Grid) -> Result<Self> {
        let grid = Grid::with_geometry(grid.rows, grid.cols, grid.spacing, grid.origin, grid.data)?;
        if grid.rows < 2 || grid.cols < 2 {
            return Err(invalid(format!(
                "heightfield needs at least 2x2 cells, got {}x{}",
                grid.rows, grid.cols
            )));
        }
        if let Some(k) = grid.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("elevation at flat index {k}")));
        }
        Ok(Self { grid })
    }

    pub fn with_geometry(self, spacing: [f64; 2], origin: [f64; 2]) -> Result<Self> {
        let g = self.grid;
        Self::from_grid(Grid::with_geometry(
            g.rows, g.cols, spacing, origin, g.data,
        )?)
    }

    pub fn rows(&self) -> usize {
        self.grid.rows
    }

    pub fn cols(&self) -> usize {
        self.grid.cols
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.grid.at(i, j)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn bounds(&self) -> Bounds {
        self.grid
            .bounds()
            .expect("heightfield has at least 2x2 cells")
    }

    /// 8-bit PGM encoding, values rounded and clamped to `[0, 255]`.
    pub fn to_pgm(&self, binary: bool) -> Vec<u8> {
        let px = self
            .grid
            .data
            .iter()
            .map(|v| v.round().clamp(0.0, 255.0) as u8);
        encode_pgm(self.cols(), self.rows(), px, binary)
    }
}

impl TryFrom<Grid> for HeightField {
    type Error = Error;

    fn try_from(grid: Grid) -> Result<Self> {
        Self::from_grid(grid)
    }
}

impl From<HeightField> for Grid {
    fn from(h: HeightField) -> Grid {
        h.grid
    }
}

pub(crate) fn encode_pgm(
    width: usize,
    height: usize,
    pixels: impl Iterator<Item = u8>,
    binary: bool,
) -> Vec<u8> {
    let magic = if binary { "P5" } else { "P2" };
    let mut out = format!("{magic}\n{width} {height}\n255\n").into_bytes();
    if binary {
        out.extend(pixels);
    } else {
        let px: Vec<u8> = pixels.collect();
        for row in px.chunks(width.max(1)) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.extend(line.join(" ").bytes());
            out.push(b'\n');
        }
    }
    out
}

/// Supported elevation-map encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DemFormat {
    PgmAscii,
    PgmBinary,
    Png,
}

impl DemFormat {
    /// Sniffs the format from the payload's magic bytes.
    pub fn detect(bytes: &[u8]) -> Option<Self> {
        if bytes.starts_with(b"P2") {
            Some(DemFormat::PgmAscii)
        } else if bytes.starts_with(b"P5") {
            Some(DemFormat::PgmBinary)
        } else if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
            Some(DemFormat::Png)
        } else {
            None
        }
    }
}

/// BT.601 luminance, used when an elevation map arrives as RGB.
pub fn luminance(r: u8, g: u8, b: u8) -> f64 {
    0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64
}

/// Decodes an 8-bit grayscale (or RGB, converted by luminance) elevation map.
pub fn load_dem(bytes: &[u8], format: DemFormat) -> Result<HeightField> {
    let (cols, rows, data) = match format {
        DemFormat::PgmAscii | DemFormat::PgmBinary => parse_pgm(bytes, format)?,
        DemFormat::Png => decode_png(bytes)?,
    };
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyImage);
    }
    HeightField::new(rows, cols, data)
}

fn parse_pgm(bytes: &[u8], format: DemFormat) -> Result<(usize, usize, Vec<f64>)> {
    let magic: &[u8] = if format == DemFormat::PgmAscii {
        b"P2"
    } else {
        b"P5"
    };
    if !bytes.starts_with(magic) {
        return Err(Error::MalformedImage("missing PGM magic number".into()));
    }
    let mut pos = 2;
    let mut header = [0usize; 3];
    for slot in header.iter_mut() {
        *slot = read_header_int(bytes, &mut pos)?;
    }
    let [width, height, maxval] = header;
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedBitDepth(format!("PGM maxval {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    let count = width * height;
    let mut data = Vec::with_capacity(count);
    if format == DemFormat::PgmBinary {
        // Exactly one whitespace byte separates maxval from the raster.
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(Error::MalformedImage("missing raster separator".into()));
        }
        pos += 1;
        let raster = bytes
            .get(pos..pos + count)
            .ok_or_else(|| Error::MalformedImage("truncated P5 raster".into()))?;
        for &v in raster {
            if v as usize > maxval {
                return Err(Error::MalformedImage(format!(
                    "sample {v} exceeds maxval {maxval}"
                )));
            }
            data.push(v as f64);
        }
    } else {
        for _ in 0..count {
            let v = read_header_int(bytes, &mut pos)
                .map_err(|_| Error::MalformedImage("truncated or invalid P2 raster".into()))?;
            if v > maxval {
                return Err(Error::MalformedImage(format!(
                    "sample {v} exceeds maxval {maxval}"
                )));
            }
            data.push(v as f64);
        }
    }
    Ok((width, height, data))
}

fn read_header_int(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            Some(c) if c.is_ascii_whitespace() => *pos += 1,
            _ => break,
        }
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::MalformedImage(
            "expected an integer in PGM header".into(),
        ));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::MalformedImage("integer overflow in PGM header".into()))
}

fn decode_png(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>)> {
    use image::{DynamicImage, ImageFormat, ImageReader};

    let reader = ImageReader::with_format(Cursor::new(bytes), ImageFormat::Png);
    let img = reader
        .decode()
        .map_err(|e| Error::MalformedImage(format!("PNG decode failed: {e}")))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::EmptyImage);
    }
    let data: Vec<f64> = match &img {
        DynamicImage::ImageLuma8(buf) => buf.pixels().map(|p| p.0[0] as f64).collect(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0] as f64).collect(),
        DynamicImage::ImageRgb8(buf) => buf
            .pixels()
            .map(|p| luminance(p.0[0], p.0[1], p.0[2]))
            .collect(),
        DynamicImage::ImageRgba8(buf) => buf
            .pixels()
            .map(|p| luminance(p.0[0], p.0[1], p.0[2]))
            .collect(),
        other => {
            return Err(Error::UnsupportedBitDepth(format!(
                "PNG color type {:?}",
                other.color()
            )))
        }
    };
    Ok((w, h, data))
}

/// `n × n` moving average with replicate padding; dimensions are preserved.
pub fn mean_smooth(field: &HeightField, n: usize) -> Result<HeightField> {
    if n == 0 || n.is_multiple_of(2) {
        return Err(invalid(format!(
            "smoothing window must be a positive odd integer, got {n}"
        )));
    }
    let g = field.grid();
    let (rows, cols) = (g.rows, g.cols);
    let half = (n / 2) as isize;
    let clamp = |k: isize, len: usize| k.clamp(0, len as isize - 1) as usize;

    // The replicate-padded box filter is separable: rows first, then columns.
    let mut horiz = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let s: f64 = (-half..=half)
                .map(|d| g.at(i, clamp(j as isize + d, cols)))
                .sum();
            horiz[i * cols + j] = s / n as f64;
        }
    }
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let s: f64 = (-half..=half)
                .map(|d| horiz[clamp(i as isize + d, rows) * cols + j])
                .sum();
            out[i * cols + j] = s / n as f64;
        }
    }
    HeightField::from_grid(Grid {
        data: out,
        ..g.clone()
    })
}

/// Gradient grids `(Gx, Gy)` of an elevation map: central differences inside,
/// one-sided differences on the edges, scaled by the grid spacing.
pub fn numerical_gradient(field: &HeightField) -> (Grid, Grid) {
    field.grid().gradient()
}

// ---------------------------------------------------------------------------
// Analytic surfaces
// ---------------------------------------------------------------------------

/// Built-in bivariate test functions plus free-form expressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceFn {
    /// `a·x + b·y + c`.
    Plane {
        a: f64,
        b: f64,
        c: f64,
    },
    /// `cos(x) + cos(y)`.
    CosSum,
    /// `cos²(x) + cos²(y)`.
    CosSquaredSum,
    /// Upper hemisphere `√(a² − x² − y²)`.
    Sphere {
        radius: f64,
    },
    /// Tractricoid `a·sech⁻¹(r/a) − √(a² − r²)`, `r = √(x² + y²)`.
    Pseudosphere {
        radius: f64,
    },
    /// `a·x²`, constant in `y`.
    Parabola {
        a: f64,
    },
    /// `|m·x|`, constant in `y`; not differentiable at `x = 0`.
    Ridge {
        slope: f64,
    },
    Expr {
        expr: Expr,
    },
}

impl SurfaceFn {
    pub fn flat() -> Self {
        SurfaceFn::Plane {
            a: 0.0,
            b: 0.0,
            c: 0.0,
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        match self {
            SurfaceFn::Plane { a, b, c } => a * x + b * y + c,
            SurfaceFn::CosSum => x.cos() + y.cos(),
            SurfaceFn::CosSquaredSum => x.cos().powi(2) + y.cos().powi(2),
            SurfaceFn::Sphere { radius } => (radius * radius - x * x - y * y).sqrt(),
            SurfaceFn::Pseudosphere { radius: a } => {
                let r = x.hypot(y);
                a * (a / r).acosh() - (a * a - r * r).sqrt()
            }
            SurfaceFn::Parabola { a } => a * x * x,
            SurfaceFn::Ridge { slope } => (slope * x).abs(),
            SurfaceFn::Expr { expr } => expr.eval(x, y),
        }
    }

    /// Closed-form `(z, p, q, [fxx, fxy, fyy])` where available.
    fn closed_form(&self, x: f64, y: f64) -> Option<(f64, f64, f64, [f64; 3])> {
        Some(match self {
            SurfaceFn::Plane { a, b, c } => (a * x + b * y + c, *a, *b, [0.0; 3]),
            SurfaceFn::CosSum => (
                x.cos() + y.cos(),
                -x.sin(),
                -y.sin(),
                [-x.cos(), 0.0, -y.cos()],
            ),
            SurfaceFn::CosSquaredSum => (
                x.cos().powi(2) + y.cos().powi(2),
                -(2.0 * x).sin(),
                -(2.0 * y).sin(),
                [-2.0 * (2.0 * x).cos(), 0.0, -2.0 * (2.0 * y).cos()],
            ),
            SurfaceFn::Sphere { radius } => {
                let s = (radius * radius - x * x - y * y).sqrt();
                let s3 = s * s * s;
                (
                    s,
                    -x / s,
                    -y / s,
                    [-1.0 / s - x * x / s3, -x * y / s3, -1.0 / s - y * y / s3],
                )
            }
            SurfaceFn::Pseudosphere { radius: a } => {
                let r = x.hypot(y);
                let w = (a * a - r * r).sqrt();
                let z = a * (a / r).acosh() - w;
                // Radial profile derivatives: f'(r) = -w/r, f''(r) = a²/(r² w).
                let d1 = -w / r;
                let d2 = a * a / (r * r * w);
                let (ux, uy) = (x / r, y / r);
                let fxx = d2 * ux * ux + d1 * (1.0 - ux * ux) / r;
                let fyy = d2 * uy * uy + d1 * (1.0 - uy * uy) / r;
                let fxy = d2 * ux * uy - d1 * ux * uy / r;
                (z, d1 * ux, d1 * uy, [fxx, fxy, fyy])
            }
            SurfaceFn::Parabola { a } => (a * x * x, 2.0 * a * x, 0.0, [2.0 * a, 0.0, 0.0]),
            SurfaceFn::Ridge { .. } | SurfaceFn::Expr { .. } => return None,
        })
    }
}

/// A bivariate function restricted to a rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSurface {
    pub func: SurfaceFn,
    pub bounds: Bounds,
}

impl AnalyticSurface {
    /// Validates that `func` is finite over a 41×41 lattice of `bounds`.
    pub fn new(func: SurfaceFn, bounds: Bounds) -> Result<Self> {
        for [x, y] in bounds.lattice(41, 41) {
            if !func.value(x, y).is_finite() {
                return Err(Error::NonFinite(format!(
                    "surface is not finite at ({x}, {y}) inside its bounds"
                )));
            }
        }
        Ok(Self { func, bounds })
    }

    fn query_unchecked(&self, x: f64, y: f64) -> SurfaceQuery {
        if let Some((z, p, q, [hxx, hxy, hyy])) = self.func.closed_form(x, y) {
            return SurfaceQuery {
                z,
                p,
                q,
                hessian: [[hxx, hxy], [hxy, hyy]],
            };
        }
        let f = |u: f64, v: f64| self.func.value(u, v);
        let z = f(x, y);
        let hx = FD_STEP * x.abs().max(1.0);
        let hy = FD_STEP * y.abs().max(1.0);
        let p = (f(x + hx, y) - f(x - hx, y)) / (2.0 * hx);
        let q = (f(x, y + hy) - f(x, y - hy)) / (2.0 * hy);
        let kx = FD_STEP_2ND * x.abs().max(1.0);
        let ky = FD_STEP_2ND * y.abs().max(1.0);
        let hxx = (f(x + kx, y) - 2.0 * z + f(x - kx, y)) / (kx * kx);
        let hyy = (f(x, y + ky) - 2.0 * z + f(x, y - ky)) / (ky * ky);
        let hxy = (f(x + kx, y + ky) - f(x + kx, y - ky) - f(x - kx, y + ky) + f(x - kx, y - ky))
            / (4.0 * kx * ky);
        SurfaceQuery {
            z,
            p,
            q,
            hessian: [[hxx, hxy], [hxy, hyy]],
        }
    }

    fn gradient_unchecked(&self, x: f64, y: f64) -> (f64, f64) {
        if let Some((_, p, q, _)) = self.func.closed_form(x, y) {
            return (p, q);
        }
        let f = |u: f64, v: f64| self.func.value(u, v);
        let hx = FD_STEP * x.abs().max(1.0);
        let hy = FD_STEP * y.abs().max(1.0);
        (
            (f(x + hx, y) - f(x - hx, y)) / (2.0 * hx),
            (f(x, y + hy) - f(x, y - hy)) / (2.0 * hy),
        )
    }
}

// ---------------------------------------------------------------------------
// Unified model
// ---------------------------------------------------------------------------

/// Elevation, gradient `(p, q)` and Hessian at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceQuery {
    pub z: f64,
    pub p: f64,
    pub q: f64,
    pub hessian: [[f64; 2]; 2],
}

/// Heightfield plus the derivative grids needed for interpolated queries.
#[derive(Debug, Clone)]
pub struct FieldSurface {
    field: HeightField,
    gx: Grid,
    gy: Grid,
    gxx: Grid,
    gxy: Grid,
    gyy: Grid,
}

impl FieldSurface {
    pub fn new(field: HeightField) -> Self {
        let (gx, gy) = field.grid().gradient();
        let (gxx, gxy_a) = gx.gradient();
        let (gyx_b, gyy) = gy.gradient();
        let gxy = Grid {
            data: gxy_a
                .data
                .iter()
                .zip(&gyx_b.data)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
            ..gxy_a
        };
        Self {
            field,
            gx,
            gy,
            gxx,
            gxy,
            gyy,
        }
    }

    pub fn field(&self) -> &HeightField {
        &self.field
    }
}

/// A queryable surface: one interface over elevation maps and analytic functions.
#[derive(Debug, Clone)]
pub enum SurfaceModel {
    Field(Arc<FieldSurface>),
    Analytic(Arc<AnalyticSurface>),
}

impl From<HeightField> for SurfaceModel {
    fn from(field: HeightField) -> Self {
        SurfaceModel::Field(Arc::new(FieldSurface::new(field)))
    }
}

impl From<AnalyticSurface> for SurfaceModel {
    fn from(s: AnalyticSurface) -> Self {
        SurfaceModel::Analytic(Arc::new(s))
    }
}

impl SurfaceModel {
    pub fn analytic(func: SurfaceFn, bounds: Bounds) -> Result<Self> {
        Ok(AnalyticSurface::new(func, bounds)?.into())
    }

    pub fn bounds(&self) -> Bounds {
        match self {
            SurfaceModel::Field(f) => f.field.bounds(),
            SurfaceModel::Analytic(a) => a.bounds,
        }
    }

    pub fn query(&self, x: f64, y: f64) -> Result<SurfaceQuery> {
        self.bounds().check(x, y)?;
        Ok(self.query_unchecked(x, y))
    }

    pub(crate) fn query_unchecked(&self, x: f64, y: f64) -> SurfaceQuery {
        match self {
            SurfaceModel::Analytic(a) => a.query_unchecked(x, y),
            SurfaceModel::Field(f) => {
                let hxy = f.gxy.bilinear(x, y);
                SurfaceQuery {
                    z: f.field.grid().bilinear(x, y),
                    p: f.gx.bilinear(x, y),
                    q: f.gy.bilinear(x, y),
                    hessian: [[f.gxx.bilinear(x, y), hxy], [hxy, f.gyy.bilinear(x, y)]],
                }
            }
        }
    }

    pub fn elevation(&self, x: f64, y: f64) -> Result<f64> {
        self.bounds().check(x, y)?;
        Ok(self.elevation_extended(x, y))
    }

    /// Elevation without the bounds check. Analytic surfaces evaluate their
    /// formula directly; heightfields replicate their edge values.
    pub fn elevation_extended(&self, x: f64, y: f64) -> f64 {
        match self {
            SurfaceModel::Analytic(a) => a.func.value(x, y),
            SurfaceModel::Field(f) => f.field.grid().bilinear(x, y),
        }
    }

    pub fn gradient(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        self.bounds().check(x, y)?;
        Ok(self.gradient_unchecked(x, y))
    }

    pub(crate) fn gradient_unchecked(&self, x: f64, y: f64) -> (f64, f64) {
        match self {
            SurfaceModel::Analytic(a) => a.gradient_unchecked(x, y),
            SurfaceModel::Field(f) => (f.gx.bilinear(x, y), f.gy.bilinear(x, y)),
        }
    }

    /// Upward unit normal `[-p, -q, 1] / √(p² + q² + 1)`.
    pub fn unit_normal(&self, x: f64, y: f64) -> Result<[f64; 3]> {
        let (p, q) = self.gradient(x, y)?;
        Ok(normal_from_gradient(p, q))
    }
}

pub fn normal_from_gradient(p: f64, q: f64) -> [f64; 3] {
    let norm = (p * p + q * q + 1.0).sqrt();
    [-p / norm, -q / norm, 1.0 / norm]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pgm_constant_and_identity() {
        let p2 = b"P2\n# comment\n3 3\n255\n128 128 128\n128 128 128\n128 128 128\n";
        let h = load_dem(p2, DemFormat::PgmAscii).unwrap();
        assert_eq!((h.rows(), h.cols()), (3, 3));
        assert!(h.grid().data.iter().all(|&v| v == 128.0));

        let mut p5 = b"P5 2 2 255\n".to_vec();
        p5.extend([0u8, 255, 0, 255]);
        let h = load_dem(&p5, DemFormat::PgmBinary).unwrap();
        assert_eq!(h.grid().data, vec![0.0, 255.0, 0.0, 255.0]);
    }

    #[test]
    fn pgm_errors() {
        assert!(matches!(
            load_dem(b"P2 2 2 65535 0 0 0 0", DemFormat::PgmAscii),
            Err(Error::UnsupportedBitDepth(_))
        ));
        assert!(matches!(
            load_dem(b"P2 0 0 255", DemFormat::PgmAscii),
            Err(Error::EmptyImage)
        ));
        assert!(matches!(
            load_dem(b"P2 2 x 255", DemFormat::PgmAscii),
            Err(Error::MalformedImage(_))
        ));
        assert!(matches!(
            load_dem(b"P5 2 2 255\n\x00\x01", DemFormat::PgmBinary),
            Err(Error::MalformedImage(_))
        ));
        assert!(matches!(
            load_dem(b"P6 2 2 255\n", DemFormat::PgmBinary),
            Err(Error::MalformedImage(_))
        ));
    }

    #[test]
    fn pgm_round_trip() {
        let h = HeightField::new(2, 3, vec![0.0, 10.4, 300.0, -5.0, 128.0, 255.0]).unwrap();
        for binary in [false, true] {
            let bytes = h.to_pgm(binary);
            let fmt = DemFormat::detect(&bytes).unwrap();
            let back = load_dem(&bytes, fmt).unwrap();
            assert_eq!(back.grid().data, vec![0.0, 10.0, 255.0, 0.0, 128.0, 255.0]);
        }
    }

    #[test]
    fn png_rgb_uses_luminance() {
        let img = image::RgbImage::from_pixel(10, 10, image::Rgb([255, 0, 0]));
        let mut bytes = Vec::new();
        img.write_to(&mut Cursor::new(&mut bytes), image::ImageFormat::Png)
            .unwrap();
        let h = load_dem(&bytes, DemFormat::Png).unwrap();
        assert_eq!((h.rows(), h.cols()), (10, 10));
        assert!(h.grid().data.iter().all(|&v| close(v, 76.245, 1e-9)));
    }

    #[test]
    fn png_gray_and_sixteen_bit() {
        let img = image::GrayImage::from_fn(4, 3, |x, y| image::Luma([(x * 10 + y) as u8]));
        let mut bytes = Vec::new();
        img.write_to(&mut Cursor::new(&mut bytes), image::ImageFormat::Png)
            .unwrap();
        let h = load_dem(&bytes, DemFormat::Png).unwrap();
        assert_eq!((h.rows(), h.cols()), (3, 4));
        assert_eq!(h.at(2, 3), 32.0);

        let img16 =
            image::ImageBuffer::<image::Luma<u16>, _>::from_pixel(3, 3, image::Luma([1000]));
        let mut bytes = Vec::new();
        img16
            .write_to(&mut Cursor::new(&mut bytes), image::ImageFormat::Png)
            .unwrap();
        assert!(matches!(
            load_dem(&bytes, DemFormat::Png),
            Err(Error::UnsupportedBitDepth(_))
        ));
        assert!(matches!(
            load_dem(b"not a png", DemFormat::Png),
            Err(Error::MalformedImage(_))
        ));
    }

    #[test]
    fn smoothing_examples() {
        let c = HeightField::new(4, 5, vec![7.0; 20]).unwrap();
        for n in [1, 3, 5, 17] {
            assert_eq!(mean_smooth(&c, n).unwrap(), c);
        }
        let h = HeightField::new(3, 3, vec![0.0, 0.0, 0.0, 0.0, 9.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(mean_smooth(&h, 1).unwrap(), h);
        assert!(close(mean_smooth(&h, 3).unwrap().at(1, 1), 1.0, 1e-12));
        assert!(mean_smooth(&h, 4).is_err());
        assert!(mean_smooth(&h, 0).is_err());
    }

    #[test]
    fn smoothing_moves_a_ramp() {
        let data: Vec<f64> = (0..49).map(|k| ((k % 7) * (k % 7)) as f64).collect();
        let h = HeightField::new(7, 7, data).unwrap();
        let once = mean_smooth(&h, 3).unwrap();
        let twice = mean_smooth(&once, 3).unwrap();
        assert_ne!(once, twice);
    }

    #[test]
    fn gradient_examples() {
        let ramp = HeightField::new(3, 4, (0..12).map(|k| (k % 4) as f64).collect()).unwrap();
        let (gx, gy) = numerical_gradient(&ramp);
        assert!(gx.data.iter().all(|&v| v == 1.0));
        assert!(gy.data.iter().all(|&v| v == 0.0));

        let flat = HeightField::new(3, 3, vec![2.0; 9]).unwrap();
        let (gx, gy) = numerical_gradient(&flat);
        assert!(gx.data.iter().chain(&gy.data).all(|&v| v == 0.0));

        let row = HeightField::new(2, 3, vec![0.0, 1.0, 4.0, 0.0, 1.0, 4.0]).unwrap();
        let (gx, _) = numerical_gradient(&row);
        assert_eq!(&gx.data[..3], &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn gradient_divides_by_spacing() {
        let ramp = HeightField::new(3, 4, (0..12).map(|k| (k % 4) as f64).collect())
            .unwrap()
            .with_geometry([0.5, 2.0], [0.0, 0.0])
            .unwrap();
        let (gx, _) = numerical_gradient(&ramp);
        assert!(gx.data.iter().all(|&v| v == 2.0));
    }

    #[test]
    fn heightfield_invariants() {
        assert!(HeightField::new(1, 3, vec![0.0; 3]).is_err());
        assert!(HeightField::new(2, 2, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        let json = r#"{"rows":2,"cols":2,"spacing":[1.0,1.0],"origin":[0.0,0.0],"data":[1,2,3]}"#;
        assert!(serde_json::from_str::<HeightField>(json).is_err());
    }

    #[test]
    fn analytic_queries() {
        let b = Bounds::square(-5.0, 5.0).unwrap();
        let m = SurfaceModel::analytic(SurfaceFn::CosSum, b).unwrap();
        let q = m.query(0.0, 0.0).unwrap();
        assert_eq!((q.z, q.p, q.q), (2.0, 0.0, 0.0));
        assert_eq!(q.hessian, [[-1.0, 0.0], [0.0, -1.0]]);

        let plane = SurfaceModel::analytic(SurfaceFn::flat(), b).unwrap();
        let q = plane.query(1.3, -2.0).unwrap();
        assert_eq!((q.z, q.p, q.q, q.hessian), (0.0, 0.0, 0.0, [[0.0; 2]; 2]));

        // Expression path goes through finite differences.
        let para = SurfaceModel::analytic(
            SurfaceFn::Expr {
                expr: Expr::parse("x^2").unwrap(),
            },
            b,
        )
        .unwrap();
        let q = para.query(1.0, 0.0).unwrap();
        assert!(close(q.p, 2.0, 1e-8));
        assert!(close(q.hessian[0][0], 2.0, 1e-5));
        assert!(matches!(
            para.query(6.0, 0.0),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn expr_matches_closed_form() {
        let b = Bounds::square(-3.0, 3.0).unwrap();
        let closed = SurfaceModel::analytic(SurfaceFn::CosSum, b).unwrap();
        let fd = SurfaceModel::analytic(
            SurfaceFn::Expr {
                expr: Expr::parse("cos(x) + cos(y)").unwrap(),
            },
            b,
        )
        .unwrap();
        for [x, y] in b.lattice(7, 7) {
            let a = closed.query(x, y).unwrap();
            let c = fd.query(x, y).unwrap();
            assert!(close(a.p, c.p, 1e-8) && close(a.q, c.q, 1e-8));
            for r in 0..2 {
                for s in 0..2 {
                    assert!(close(a.hessian[r][s], c.hessian[r][s], 1e-5));
                }
            }
        }
    }

    #[test]
    fn pseudosphere_closed_form_matches_differences() {
        let b = Bounds::square(0.3, 0.6).unwrap();
        let f = SurfaceFn::Pseudosphere { radius: 1.0 };
        let m = SurfaceModel::analytic(f.clone(), b).unwrap();
        let h = 1e-4;
        for [x, y] in b.lattice(4, 4) {
            let q = m.query(x, y).unwrap();
            let p_fd = (f.value(x + h, y) - f.value(x - h, y)) / (2.0 * h);
            let fxy_fd = (f.value(x + h, y + h) - f.value(x + h, y - h) - f.value(x - h, y + h)
                + f.value(x - h, y - h))
                / (4.0 * h * h);
            assert!(close(q.p, p_fd, 1e-6));
            assert!(close(q.hessian[0][1], fxy_fd, 1e-4));
        }
    }

    #[test]
    fn unit_normal_examples() {
        let b = Bounds::square(-2.0, 2.0).unwrap();
        let plane = SurfaceModel::analytic(SurfaceFn::flat(), b).unwrap();
        assert_eq!(plane.unit_normal(0.5, 0.5).unwrap(), [0.0, 0.0, 1.0]);
        let n = normal_from_gradient(1.0, 0.0);
        let s = 2f64.sqrt();
        assert!(close(n[0], -1.0 / s, 1e-15) && n[1] == 0.0 && close(n[2], 1.0 / s, 1e-15));
        let n = normal_from_gradient(1.0, 1.0);
        let s = 3f64.sqrt();
        assert!(close(n[0], -1.0 / s, 1e-15) && close(n[1], -1.0 / s, 1e-15));
        assert!(close(n[2], 1.0 / s, 1e-15));
    }

    #[test]
    fn sampled_cos_agrees_with_closed_form() {
        let b = Bounds::square(-3.0, 3.0).unwrap();
        let n = 121;
        let f = SurfaceFn::CosSum;
        let data = b
            .lattice(n, n)
            .iter()
            .map(|&[x, y]| f.value(x, y))
            .collect();
        let grid = Grid::over_bounds(&b, n, n, data).unwrap();
        assert!((grid.spacing[0] - 0.05).abs() < 1e-12);
        let sampled: SurfaceModel = HeightField::from_grid(grid).unwrap().into();
        let exact = SurfaceModel::analytic(f, b).unwrap();
        for [x, y] in Bounds::square(-2.5, 2.5).unwrap().lattice(11, 11) {
            let (ps, qs) = sampled.gradient(x, y).unwrap();
            let (pe, qe) = exact.gradient(x, y).unwrap();
            assert!(close(ps, pe, 5e-3) && close(qs, qe, 5e-3), "({x},{y})");
        }
    }

    #[test]
    fn analytic_rejects_non_finite() {
        let b = Bounds::square(-3.0, 3.0).unwrap();
        assert!(AnalyticSurface::new(SurfaceFn::Sphere { radius: 2.0 }, b).is_err());
    }
}
