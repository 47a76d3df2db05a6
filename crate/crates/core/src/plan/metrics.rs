//! Raster coverage and overlap of a set of circles.

use serde::{Deserialize, Serialize};

use super::overlap::overlap_unchecked;
use super::Circle;
use crate::geometry::Bounds;

pub const DEFAULT_GRID_RES: usize = 400;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageMetrics {
    /// Area of the bounds covered by at least one circle.
    pub area_covered: f64,
    /// `area_covered` as a percentage of the bound rectangle.
    pub percent_covered: f64,
    /// Sum of pairwise lens areas.
    pub overlap_closed_form: f64,
    /// Raster estimate: cell area times the excess multiplicity of every cell.
    pub overlap_grid: f64,
}

/// Number of circles containing each cell center of a `res × res` raster of
/// the bounds (row-major, rows along y).
pub fn coverage_counts(circles: &[Circle], bounds: &Bounds, res: usize) -> Vec<u32> {
    let mut counts = vec![0_u32; res * res];
    if res == 0 {
        return counts;
    }
    let sx = bounds.width() / res as f64;
    let sy = bounds.height() / res as f64;
    let index_range = |lo: f64, hi: f64, origin: f64, step: f64| {
        let a = ((lo - origin) / step - 0.5).floor().max(0.0) as usize;
        let b = (((hi - origin) / step - 0.5).ceil().max(-1.0) + 1.0) as usize;
        (a.min(res), b.min(res))
    };
    for c in circles {
        let (j0, j1) = index_range(c.x - c.r, c.x + c.r, bounds.x_min, sx);
        let (i0, i1) = index_range(c.y - c.r, c.y + c.r, bounds.y_min, sy);
        for i in i0..i1 {
            let y = bounds.y_min + (i as f64 + 0.5) * sy;
            for j in j0..j1 {
                let x = bounds.x_min + (j as f64 + 0.5) * sx;
                if c.contains(x, y) {
                    counts[i * res + j] += 1;
                }
            }
        }
    }
    counts
}

pub fn coverage_metrics(circles: &[Circle], bounds: &Bounds, res: usize) -> CoverageMetrics {
    if circles.is_empty() || res == 0 {
        return CoverageMetrics::default();
    }
    let counts = coverage_counts(circles, bounds, res);
    let cell = bounds.area() / (res * res) as f64;
    let covered = counts.iter().filter(|&&c| c > 0).count();
    let excess: u64 = counts.iter().map(|&c| c.saturating_sub(1) as u64).sum();
    let mut closed = 0.0;
    for (i, a) in circles.iter().enumerate() {
        for b in &circles[i + 1..] {
            closed += overlap_unchecked(a.r, b.r, (a.x - b.x).hypot(a.y - b.y));
        }
    }
    let area_covered = cell * covered as f64;
    CoverageMetrics {
        area_covered,
        percent_covered: (100.0 * covered as f64 / (res * res) as f64).min(100.0),
        overlap_closed_form: closed,
        overlap_grid: cell * excess as f64,
    }
}
