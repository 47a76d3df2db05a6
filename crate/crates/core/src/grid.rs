//! Row-major scalar grids and their JSON schema.
//!
//! Every raster the crate emits (heightfields, gradients, curvature and
//! imaging surfaces) shares the same layout:
//!
//! ```json
//! {"rows": M, "cols": N, "spacing": [sx, sy], "origin": [x0, y0], "data": [...]}
//! ```
//!
//! Cell `(i, j)` sits at `x = x0 + j·sx`, `y = y0 + i·sy`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::Bounds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub spacing: [f64; 2],
    pub origin: [f64; 2],
    pub data: Vec<f64>,
}

impl Grid {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::with_geometry(rows, cols, [1.0, 1.0], [0.0, 0.0], data)
    }

    pub fn with_geometry(
        rows: usize,
        cols: usize,
        spacing: [f64; 2],
        origin: [f64; 2],
        data: Vec<f64>,
    ) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(invalid(format!(
                "grid {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        if !(spacing[0] > 0.0 && spacing[1] > 0.0 && spacing.iter().all(|s| s.is_finite())) {
            return Err(invalid("grid spacing must be positive and finite"));
        }
        Ok(Self {
            rows,
            cols,
            spacing,
            origin,
            data,
        })
    }

    /// A grid spanning `bounds` with `cols × rows` nodes on both edges.
    pub fn over_bounds(bounds: &Bounds, rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(invalid("grid over bounds needs at least 2 nodes per axis"));
        }
        let spacing = [
            bounds.width() / (cols - 1) as f64,
            bounds.height() / (rows - 1) as f64,
        ];
        Self::with_geometry(rows, cols, spacing, [bounds.x_min, bounds.y_min], data)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn x_of(&self, j: usize) -> f64 {
        self.origin[0] + j as f64 * self.spacing[0]
    }

    #[inline]
    pub fn y_of(&self, i: usize) -> f64 {
        self.origin[1] + i as f64 * self.spacing[1]
    }

    pub fn bounds(&self) -> Result<Bounds> {
        Bounds::new(
            self.origin[0],
            self.x_of(self.cols.saturating_sub(1)),
            self.origin[1],
            self.y_of(self.rows.saturating_sub(1)),
        )
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Grid {
        Grid {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Bilinear interpolation; coordinates outside the grid are clamped to
    /// the nearest edge (replicate extension).
    pub fn bilinear(&self, x: f64, y: f64) -> f64 {
        let (j0, tx) = cell_coord(x, self.origin[0], self.spacing[0], self.cols);
        let (i0, ty) = cell_coord(y, self.origin[1], self.spacing[1], self.rows);
        let j1 = (j0 + 1).min(self.cols - 1);
        let i1 = (i0 + 1).min(self.rows - 1);
        let top = self.at(i0, j0) * (1.0 - tx) + self.at(i0, j1) * tx;
        let bottom = self.at(i1, j0) * (1.0 - tx) + self.at(i1, j1) * tx;
        top * (1.0 - ty) + bottom * ty
    }

    /// Central differences in the interior and one-sided differences on the
    /// edges, divided by the spacing. Returns `(d/dx, d/dy)`.
    pub fn gradient(&self) -> (Grid, Grid) {
        let (m, n) = (self.rows, self.cols);
        let mut gx = vec![0.0; m * n];
        let mut gy = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                gx[i * n + j] = (if n < 2 {
                    0.0
                } else if j == 0 {
                    self.at(i, 1) - self.at(i, 0)
                } else if j == n - 1 {
                    self.at(i, n - 1) - self.at(i, n - 2)
                } else {
                    (self.at(i, j + 1) - self.at(i, j - 1)) / 2.0
                }) / self.spacing[0];
                gy[i * n + j] = (if m < 2 {
                    0.0
                } else if i == 0 {
                    self.at(1, j) - self.at(0, j)
                } else if i == m - 1 {
                    self.at(m - 1, j) - self.at(m - 2, j)
                } else {
                    (self.at(i + 1, j) - self.at(i - 1, j)) / 2.0
                }) / self.spacing[1];
            }
        }
        (
            Grid {
                data: gx,
                ..self.clone()
            },
            Grid {
                data: gy,
                ..self.clone()
            },
        )
    }
}

fn cell_coord(v: f64, origin: f64, step: f64, n: usize) -> (usize, f64) {
    if n < 2 {
        return (0, 0.0);
    }
    let f = ((v - origin) / step).clamp(0.0, (n - 1) as f64);
    let k = (f.floor() as usize).min(n - 2);
    (k, f - k as f64)
}

/// A grid with a per-cell validity flag, serialized as a 0/1 bitmask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskedGrid {
    #[serde(flatten)]
    pub grid: Grid,
    pub valid: Vec<u8>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_row() {
        let g = Grid::new(2, 3, vec![0.0, 1.0, 4.0, 0.0, 1.0, 4.0]).unwrap();
        let (gx, gy) = g.gradient();
        assert_eq!(&gx.data[..3], &[1.0, 2.0, 3.0]);
        assert!(gy.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bilinear_reproduces_plane() {
        let mut data = Vec::new();
        for i in 0..4 {
            for j in 0..5 {
                data.push(2.0 * j as f64 - 3.0 * i as f64 + 1.0);
            }
        }
        let g = Grid::with_geometry(4, 5, [0.5, 0.25], [1.0, -1.0], data).unwrap();
        for &(x, y) in &[(1.0, -1.0), (1.3, -0.6), (3.0, -0.25), (2.2, -0.9)] {
            let expect = 2.0 * (x - 1.0) / 0.5 - 3.0 * (y + 1.0) / 0.25 + 1.0;
            assert!((g.bilinear(x, y) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn size_mismatch_rejected() {
        assert!(Grid::new(2, 2, vec![0.0; 3]).is_err());
    }
}
