//! Dividing covered ground among capture points.
//!
//! A point inside several circles belongs to the nearest center among the
//! circles that contain it, with ties going to the lower index. Between two
//! overlapping circles the separator is the perpendicular bisector of their
//! centers, clipped to the lens.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::Bounds;
use crate::plan::Circle;
use crate::terrain::encode_pgm;

/// Label raster over cell centers. `data` holds the circle index, or `-1`
/// where no circle covers the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelGrid {
    pub rows: usize,
    pub cols: usize,
    pub spacing: [f64; 2],
    /// Center of cell `(0, 0)`.
    pub origin: [f64; 2],
    pub data: Vec<i64>,
}

impl LabelGrid {
    pub fn label(&self, i: usize, j: usize) -> Option<usize> {
        usize::try_from(self.data[i * self.cols + j]).ok()
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + j as f64 * self.spacing[0],
            self.origin[1] + i as f64 * self.spacing[1],
        ]
    }

    /// Cell containing `(x, y)`, if inside the raster.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let j = ((x - self.origin[0]) / self.spacing[0] + 0.5).floor();
        let i = ((y - self.origin[1]) / self.spacing[1] + 0.5).floor();
        (j >= 0.0 && i >= 0.0 && (j as usize) < self.cols && (i as usize) < self.rows)
            .then_some((i as usize, j as usize))
    }

    pub fn unassigned(&self) -> usize {
        self.data.iter().filter(|&&v| v < 0).count()
    }

    /// Gray level `(label + 1) mod 256`, 0 where unassigned.
    pub fn to_pgm(&self, binary: bool) -> Vec<u8> {
        let px = self
            .data
            .iter()
            .map(|&v| if v < 0 { 0 } else { ((v + 1) % 256) as u8 });
        encode_pgm(self.cols, self.rows, px, binary)
    }
}

/// Index of the nearest circle containing `(x, y)`; lowest index on ties.
pub fn nearest_containing(circles: &[Circle], x: f64, y: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, c) in circles.iter().enumerate() {
        if !c.contains(x, y) {
            continue;
        }
        let d2 = (x - c.x).powi(2) + (y - c.y).powi(2);
        if best.is_none_or(|(_, b)| d2 < b) {
            best = Some((k, d2));
        }
    }
    best.map(|(k, _)| k)
}

/// Labels the cell centers of a `grid_res × grid_res` raster of `bounds`.
pub fn assign_points(circles: &[Circle], bounds: &Bounds, grid_res: usize) -> Result<LabelGrid> {
    if circles.is_empty() {
        return Err(invalid("partition needs at least one circle"));
    }
    if grid_res == 0 {
        return Err(invalid("partition grid needs at least one cell"));
    }
    let spacing = [
        bounds.width() / grid_res as f64,
        bounds.height() / grid_res as f64,
    ];
    let origin = [
        bounds.x_min + 0.5 * spacing[0],
        bounds.y_min + 0.5 * spacing[1],
    ];
    let data = (0..grid_res * grid_res)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / grid_res, k % grid_res);
            let x = origin[0] + j as f64 * spacing[0];
            let y = origin[1] + i as f64 * spacing[1];
            nearest_containing(circles, x, y).map_or(-1, |c| c as i64)
        })
        .collect();
    Ok(LabelGrid {
        rows: grid_res,
        cols: grid_res,
        spacing,
        origin,
        data,
    })
}

/// Separator between circles `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySegment {
    pub i: usize,
    pub j: usize,
    pub a: [f64; 2],
    pub b: [f64; 2],
}

/// Perpendicular bisector of every overlapping pair, clipped so both ends lie
/// in both disks. Pairs that do not overlap, or whose clipped bisector is
/// empty, contribute nothing.
pub fn decision_boundaries(circles: &[Circle]) -> Vec<BoundarySegment> {
    let mut out = Vec::new();
    for (i, p) in circles.iter().enumerate() {
        for (j, q) in circles.iter().enumerate().skip(i + 1) {
            let (dx, dy) = (q.x - p.x, q.y - p.y);
            let dist = dx.hypot(dy);
            if dist == 0.0 || dist >= p.r + q.r {
                continue;
            }
            let half = 0.5 * dist;
            let reach = |r: f64| {
                if r > half {
                    (r * r - half * half).sqrt()
                } else {
                    0.0
                }
            };
            let h = reach(p.r).min(reach(q.r));
            if h <= 0.0 {
                continue;
            }
            let mid = [p.x + 0.5 * dx, p.y + 0.5 * dy];
            let u = [-dy / dist, dx / dist];
            out.push(BoundarySegment {
                i,
                j,
                a: [mid[0] - h * u[0], mid[1] - h * u[1]],
                b: [mid[0] + h * u[0], mid[1] + h * u[1]],
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64, r: f64) -> Circle {
        Circle { x, y, r }
    }

    #[test]
    fn single_circle_labels() {
        let b = Bounds::square(-2.0, 2.0).unwrap();
        let g = assign_points(&[c(0.0, 0.0, 1.0)], &b, 40).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                let [x, y] = g.cell_center(i, j);
                let want = if x * x + y * y <= 1.0 { Some(0) } else { None };
                assert_eq!(g.label(i, j), want);
            }
        }
        assert!(assign_points(&[], &b, 40).is_err());
    }

    #[test]
    fn nearest_and_ties() {
        let cs = [c(0.0, 0.0, 1.0), c(1.0, 0.0, 1.0)];
        assert_eq!(nearest_containing(&cs, 0.7, 0.0), Some(1));
        assert_eq!(nearest_containing(&cs, 0.5, 0.2), Some(0));
        assert_eq!(nearest_containing(&cs, 3.0, 0.0), None);
    }

    #[test]
    fn equal_pair_boundary() {
        let segs = decision_boundaries(&[c(0.0, 0.0, 1.0), c(1.0, 0.0, 1.0)]);
        assert_eq!(segs.len(), 1);
        let s = segs[0];
        let h = 0.75f64.sqrt();
        assert!((s.a[0] - 0.5).abs() < 1e-15 && (s.b[0] - 0.5).abs() < 1e-15);
        assert!((s.a[1] + h).abs() < 1e-15 && (s.b[1] - h).abs() < 1e-15);
        assert!(decision_boundaries(&[c(0.0, 0.0, 1.0), c(3.0, 0.0, 1.0)]).is_empty());
    }

    #[test]
    fn small_circle_beyond_bisector() {
        // The small circle does not reach the bisector.
        assert!(decision_boundaries(&[c(0.0, 0.0, 2.0), c(1.5, 0.0, 0.6)]).is_empty());
        let segs = decision_boundaries(&[c(0.0, 0.0, 2.0), c(1.0, 0.0, 0.8)]);
        let s = segs[0];
        for p in [s.a, s.b] {
            assert!(p[0].hypot(p[1]) <= 2.0 + 1e-12);
            assert!((p[0] - 1.0).hypot(p[1]) <= 0.8 + 1e-12);
        }
    }

    #[test]
    fn pgm_palette() {
        let g = LabelGrid {
            rows: 1,
            cols: 3,
            spacing: [1.0, 1.0],
            origin: [0.0, 0.0],
            data: vec![-1, 0, 255],
        };
        assert_eq!(g.to_pgm(false), b"P2\n3 1\n255\n0 1 0\n".to_vec());
        assert_eq!(g.unassigned(), 1);
    }
}
