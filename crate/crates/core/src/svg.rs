//! Deterministic SVG rendering: contour maps with circle, polygon and
//! segment overlays. Coordinates are written with three decimals so output
//! is byte-stable across runs.

use std::fmt::Write as _;

use crate::geometry::Bounds;
use crate::grid::Grid;

pub type Segment = [[f64; 2]; 2];

/// Marching-squares iso-segments of `grid` at `level`, in world coordinates.
pub fn contour_segments(grid: &Grid, level: f64) -> Vec<Segment> {
    let mut out = Vec::new();
    if grid.rows < 2 || grid.cols < 2 {
        return out;
    }
    for i in 0..grid.rows - 1 {
        for j in 0..grid.cols - 1 {
            // Corners counter-clockwise from the lower left.
            let v = [
                grid.at(i, j),
                grid.at(i, j + 1),
                grid.at(i + 1, j + 1),
                grid.at(i + 1, j),
            ];
            if v.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let p = [
                [grid.x_of(j), grid.y_of(i)],
                [grid.x_of(j + 1), grid.y_of(i)],
                [grid.x_of(j + 1), grid.y_of(i + 1)],
                [grid.x_of(j), grid.y_of(i + 1)],
            ];
            let case = v
                .iter()
                .enumerate()
                .fold(0, |acc, (k, &x)| acc | (((x >= level) as usize) << k));
            // Crossing point on edge k, which joins corner k to corner k+1.
            let edge = |k: usize| {
                let (a, b) = (k, (k + 1) % 4);
                let t = (level - v[a]) / (v[b] - v[a]);
                [
                    p[a][0] + t * (p[b][0] - p[a][0]),
                    p[a][1] + t * (p[b][1] - p[a][1]),
                ]
            };
            let mut seg = |e1: usize, e2: usize| out.push([edge(e1), edge(e2)]);
            match case {
                0 | 15 => {}
                1 | 14 => seg(3, 0),
                2 | 13 => seg(0, 1),
                3 | 12 => seg(3, 1),
                4 | 11 => seg(1, 2),
                6 | 9 => seg(0, 2),
                7 | 8 => seg(2, 3),
                5 | 10 => {
                    let centre_above = (v.iter().sum::<f64>() / 4.0 >= level) == (case == 5);
                    if centre_above {
                        seg(3, 2);
                        seg(0, 1);
                    } else {
                        seg(3, 0);
                        seg(1, 2);
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    out
}

/// `n` levels evenly spaced strictly between the grid's min and max. A
/// constant grid has none.
pub fn contour_levels(grid: &Grid, n: usize) -> Vec<f64> {
    let finite = grid.data.iter().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = finite.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if !(hi > lo) {
        return Vec::new();
    }
    (1..=n)
        .map(|k| lo + (hi - lo) * k as f64 / (n + 1) as f64)
        .collect()
}

/// An SVG document whose viewport shows `bounds` with +y pointing up.
pub struct SvgCanvas {
    bounds: Bounds,
    width: f64,
    height: f64,
    body: String,
}

impl SvgCanvas {
    pub fn new(bounds: Bounds, width_px: f64) -> Self {
        let height = width_px * bounds.height() / bounds.width();
        Self {
            bounds,
            width: width_px,
            height,
            body: String::new(),
        }
    }

    fn map(&self, p: [f64; 2]) -> [f64; 2] {
        let b = &self.bounds;
        [
            (p[0] - b.x_min) / b.width() * self.width,
            (b.y_max - p[1]) / b.height() * self.height,
        ]
    }

    fn scale(&self) -> f64 {
        self.width / self.bounds.width()
    }

    /// Iso-lines of `grid` at `levels`, one path per level.
    pub fn contours(&mut self, grid: &Grid, levels: &[f64], stroke: &str) -> &mut Self {
        for &level in levels {
            let segs = contour_segments(grid, level);
            if segs.is_empty() {
                continue;
            }
            let mut d = String::new();
            for [a, b] in segs {
                let (a, b) = (self.map(a), self.map(b));
                let _ = write!(d, "M{:.3} {:.3}L{:.3} {:.3}", a[0], a[1], b[0], b[1]);
            }
            let _ = writeln!(
                self.body,
                r#"<path class="contour" data-level="{level:.6}" d="{d}" fill="none" stroke="{stroke}" stroke-width="0.6"/>"#
            );
        }
        self
    }

    pub fn circle(&mut self, center: [f64; 2], r: f64, stroke: &str) -> &mut Self {
        let c = self.map(center);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="{stroke}" stroke-width="1"/>"#,
            c[0],
            c[1],
            r * self.scale()
        );
        self
    }

    pub fn point(&mut self, p: [f64; 2], fill: &str) -> &mut Self {
        let c = self.map(p);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.3}" cy="{:.3}" r="2" fill="{fill}"/>"#,
            c[0], c[1]
        );
        self
    }

    pub fn polygon(&mut self, vertices: &[[f64; 2]], stroke: &str) -> &mut Self {
        let pts: Vec<String> = vertices
            .iter()
            .map(|&v| {
                let p = self.map(v);
                format!("{:.3},{:.3}", p[0], p[1])
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="none" stroke="{stroke}" stroke-width="1"/>"#,
            pts.join(" ")
        );
        self
    }

    /// `angle` is radians from +x in world coordinates; `major`/`minor` are
    /// full axis lengths.
    pub fn ellipse(
        &mut self,
        center: [f64; 2],
        major: f64,
        minor: f64,
        angle: f64,
        stroke: &str,
    ) -> &mut Self {
        let c = self.map(center);
        let s = self.scale();
        let _ = writeln!(
            self.body,
            r#"<ellipse cx="{:.3}" cy="{:.3}" rx="{:.3}" ry="{:.3}" transform="rotate({:.3} {:.3} {:.3})" fill="none" stroke="{stroke}" stroke-width="1"/>"#,
            c[0],
            c[1],
            0.5 * major * s,
            0.5 * minor * s,
            -angle.to_degrees(),
            c[0],
            c[1]
        );
        self
    }

    pub fn segment(&mut self, a: [f64; 2], b: [f64; 2], stroke: &str) -> &mut Self {
        let (a, b) = (self.map(a), self.map(b));
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{stroke}" stroke-width="1"/>"#,
            a[0], a[1], b[0], b[1]
        );
        self
    }

    /// Filled square cells of side `size` centered at each point.
    pub fn cells(&mut self, centers: &[[f64; 2]], size: [f64; 2], fill: &str) -> &mut Self {
        let s = self.scale();
        let (w, h) = (size[0] * s, size[1] * self.height / self.bounds.height());
        for &p in centers {
            let c = self.map(p);
            let _ = writeln!(
                self.body,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{fill}" fill-opacity="0.35"/>"#,
                c[0] - 0.5 * w,
                c[1] - 0.5 * h,
                w,
                h
            );
        }
        self
    }

    pub fn finish(&self) -> String {
        format!(
            concat!(
                r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.3}" height="{h:.3}" viewBox="0 0 {w:.3} {h:.3}">"#,
                "\n",
                r#"<rect width="100%" height="100%" fill="white"/>"#,
                "\n{body}</svg>\n"
            ),
            w = self.width,
            h = self.height,
            body = self.body
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone(n: usize) -> Grid {
        let mut data = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (j as f64 - (n / 2) as f64, i as f64 - (n / 2) as f64);
                data.push((x * x + y * y).sqrt());
            }
        }
        Grid::new(n, n, data).unwrap()
    }

    #[test]
    fn constant_grid_has_no_contours() {
        let g = Grid::new(3, 3, vec![7.0; 9]).unwrap();
        assert!(contour_levels(&g, 5).is_empty());
        assert!(contour_segments(&g, 7.5).is_empty());
    }

    #[test]
    fn cone_contour_lies_on_circle() {
        let g = cone(21);
        let segs = contour_segments(&g, 5.0);
        assert!(!segs.is_empty());
        for s in segs {
            for p in s {
                let r = (p[0] - 10.0).hypot(p[1] - 10.0);
                assert!((r - 5.0).abs() < 0.25, "{p:?}");
            }
        }
    }

    #[test]
    fn linear_ramp_contour_is_exact() {
        let g = Grid::new(3, 4, (0..12).map(|k| (k % 4) as f64).collect()).unwrap();
        for [a, b] in contour_segments(&g, 1.5) {
            assert_eq!(a[0], 1.5);
            assert_eq!(b[0], 1.5);
        }
    }

    #[test]
    fn rendering_is_stable() {
        let g = cone(9);
        let b = g.bounds().unwrap();
        let render = || {
            let mut c = SvgCanvas::new(b, 200.0);
            c.contours(&g, &contour_levels(&g, 4), "#555")
                .circle([4.0, 4.0], 1.0, "green")
                .point([4.0, 4.0], "red")
                .segment([0.0, 0.0], [8.0, 8.0], "black")
                .polygon(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], "blue")
                .ellipse([4.0, 4.0], 2.0, 1.0, 0.5, "blue");
            c.finish()
        };
        let a = render();
        assert_eq!(a, render());
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains(r#"<circle cx="100.000" cy="100.000" r="25.000""#));
    }
}
