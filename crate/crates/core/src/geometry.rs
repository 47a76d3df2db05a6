use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Axis-aligned rectangle in the surface's `(x, y)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || x_min >= x_max || y_min >= y_max {
            return Err(invalid(format!(
                "bounds must be finite and nonempty, got x:[{x_min}, {x_max}] y:[{y_min}, {y_max}]"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    /// The square `[low, high]²` used throughout for analytic surfaces.
    pub fn square(low: f64, high: f64) -> Result<Self> {
        Self::new(low, high, low, high)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> [f64; 2] {
        [
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        ]
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        // Tolerates rounding when grid coordinates land on an edge.
        let tx = 1e-12 * self.width().max(1.0);
        let ty = 1e-12 * self.height().max(1.0);
        x >= self.x_min - tx && x <= self.x_max + tx && y >= self.y_min - ty && y <= self.y_max + ty
    }

    pub fn check(&self, x: f64, y: f64) -> Result<()> {
        if x.is_finite() && y.is_finite() && self.contains(x, y) {
            Ok(())
        } else {
            Err(Error::OutOfBounds { x, y })
        }
    }

    pub fn clamp(&self, x: f64, y: f64) -> [f64; 2] {
        [
            x.clamp(self.x_min, self.x_max),
            y.clamp(self.y_min, self.y_max),
        ]
    }

    /// Uniform `n × n` lattice including both edges, row-major by `y`.
    pub fn lattice(&self, nx: usize, ny: usize) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(nx * ny);
        for i in 0..ny {
            let y = lerp_index(self.y_min, self.y_max, i, ny);
            for j in 0..nx {
                out.push([lerp_index(self.x_min, self.x_max, j, nx), y]);
            }
        }
        out
    }
}

/// `i`-th of `n` evenly spaced values spanning `[lo, hi]`.
pub fn lerp_index(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if n <= 1 {
        return 0.5 * (lo + hi);
    }
    if i + 1 == n {
        return hi;
    }
    lo + (hi - lo) * (i as f64) / ((n - 1) as f64)
}

pub fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_bounds() {
        assert!(Bounds::square(1.0, 1.0).is_err());
        assert!(Bounds::new(0.0, 1.0, 2.0, f64::NAN).is_err());
    }

    #[test]
    fn lattice_hits_both_edges() {
        let b = Bounds::square(-5.0, 5.0).unwrap();
        let pts = b.lattice(3, 2);
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], [-5.0, -5.0]);
        assert_eq!(pts[2], [5.0, -5.0]);
        assert_eq!(pts[5], [5.0, 5.0]);
    }

    #[test]
    fn check_reports_out_of_bounds() {
        let b = Bounds::square(0.0, 1.0).unwrap();
        assert!(b.check(0.5, 0.5).is_ok());
        assert!(matches!(b.check(1.5, 0.5), Err(Error::OutOfBounds { .. })));
    }
}
