//! Normal-ray density: where many surface normals cross, one capture point
//! sees many surface points head-on.
//!
//! Rays leave sampled surface points along the upward unit normal and are
//! marched through a regular grid above the surface; every cell a ray passes
//! through is counted once for that ray. Strict local maxima of the count are
//! reported as candidate capture points. This is a heuristic only.

use serde::{Deserialize, Serialize};

use crate::curve::{CurveFn, Domain};
use crate::error::{invalid, Result};
use crate::grid::Grid;
use crate::terrain::{normal_from_gradient, SurfaceModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalDensityOptions {
    /// Cells per axis of the counting grid.
    pub resolution: usize,
    /// Surface samples per axis.
    pub samples: usize,
    /// Smallest count worth suggesting.
    pub min_count: u32,
    pub max_suggestions: usize,
}

impl Default for NormalDensityOptions {
    fn default() -> Self {
        Self {
            resolution: 64,
            samples: 200,
            min_count: 2,
            max_suggestions: 20,
        }
    }
}

impl NormalDensityOptions {
    fn validate(&self) -> Result<()> {
        if self.resolution < 2 || self.samples < 2 {
            return Err(invalid(
                "normal density needs resolution >= 2 and samples >= 2",
            ));
        }
        Ok(())
    }
}

/// Counts over `x × y` for a curve; `density` uses the grid schema with
/// cell centers as nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMap {
    pub density: Grid,
    pub suggested: Vec<[f64; 2]>,
}

/// Counts over `x × y × z` for a surface, indexed `(k·ny + i)·nx + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityVolume {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Center of cell `(0, 0, 0)`.
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub counts: Vec<u32>,
    pub suggested: Vec<[f64; 3]>,
}

/// Parameter interval `[t0, t1]`, `t0 ≥ 0`, over which `p + t·dir` stays in
/// the box `lo..hi`.
fn clip_ray<const D: usize>(
    p: [f64; D],
    dir: [f64; D],
    lo: [f64; D],
    hi: [f64; D],
) -> Option<(f64, f64)> {
    let (mut t0, mut t1) = (0.0_f64, f64::INFINITY);
    for a in 0..D {
        if dir[a].abs() < 1e-15 {
            if p[a] < lo[a] || p[a] > hi[a] {
                return None;
            }
        } else {
            let (u, v) = ((lo[a] - p[a]) / dir[a], (hi[a] - p[a]) / dir[a]);
            t0 = t0.max(u.min(v));
            t1 = t1.min(u.max(v));
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// Marches one ray and bumps each cell it visits once.
fn cast<const D: usize>(
    p: [f64; D],
    dir: [f64; D],
    lo: [f64; D],
    size: [f64; D],
    n: [usize; D],
    counts: &mut [u32],
) {
    let mut hi = lo;
    for a in 0..D {
        hi[a] = lo[a] + size[a] * n[a] as f64;
    }
    let Some((t0, t1)) = clip_ray(p, dir, lo, hi) else {
        return;
    };
    let h = 0.25 * size.iter().cloned().fold(f64::INFINITY, f64::min);
    let steps = ((t1 - t0) / h).ceil() as usize;
    let mut last = usize::MAX;
    for s in 0..=steps {
        let t = (t0 + s as f64 * h).min(t1);
        let mut flat = 0;
        for a in (0..D).rev() {
            let c =
                (((p[a] + t * dir[a] - lo[a]) / size[a]).floor().max(0.0) as usize).min(n[a] - 1);
            flat = flat * n[a] + c;
        }
        // A straight ray never re-enters a cell it has left.
        if flat != last {
            counts[flat] += 1;
            last = flat;
        }
    }
}

/// Flat indices of strict local maxima (all in-grid neighbours lower), best
/// first.
fn strict_maxima<const D: usize>(
    counts: &[u32],
    n: [usize; D],
    min: u32,
    limit: usize,
) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let neighbours = 3usize.pow(D as u32);
    for flat in 0..counts.len() {
        let v = counts[flat];
        if v < min {
            continue;
        }
        let mut idx = [0usize; D];
        let mut rem = flat;
        for a in 0..D {
            idx[a] = rem % n[a];
            rem /= n[a];
        }
        let mut is_max = true;
        'nb: for code in 0..neighbours {
            if code == neighbours / 2 {
                continue;
            }
            let mut c = code;
            let mut other = 0usize;
            let mut stride = 1usize;
            for a in 0..D {
                let off = (c % 3) as isize - 1;
                c /= 3;
                let q = idx[a] as isize + off;
                if q < 0 || q >= n[a] as isize {
                    continue 'nb;
                }
                other += q as usize * stride;
                stride *= n[a];
            }
            if counts[other] >= v {
                is_max = false;
                break;
            }
        }
        if is_max {
            out.push(flat);
        }
    }
    out.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    out.truncate(limit);
    out
}

pub fn normal_density_curve(
    f: &CurveFn,
    domain: Domain,
    y_range: [f64; 2],
    opts: &NormalDensityOptions,
) -> Result<DensityMap> {
    opts.validate()?;
    if !(y_range[1] > y_range[0]) {
        return Err(invalid("density y-range must be increasing"));
    }
    let n = opts.resolution;
    let size = [
        domain.width() / n as f64,
        (y_range[1] - y_range[0]) / n as f64,
    ];
    let lo = [domain.lo, y_range[0]];
    let mut counts = vec![0_u32; n * n];
    for x in domain.samples(opts.samples) {
        let slope = f.derivative(x);
        let w = (1.0 + slope * slope).sqrt();
        cast(
            [x, f.value(x)],
            [-slope / w, 1.0 / w],
            lo,
            size,
            [n, n],
            &mut counts,
        );
    }
    let centre = |flat: usize| {
        [
            lo[0] + ((flat % n) as f64 + 0.5) * size[0],
            lo[1] + ((flat / n) as f64 + 0.5) * size[1],
        ]
    };
    let suggested = strict_maxima(&counts, [n, n], opts.min_count, opts.max_suggestions)
        .into_iter()
        .map(centre)
        .collect();
    let density = Grid::with_geometry(
        n,
        n,
        size,
        [lo[0] + 0.5 * size[0], lo[1] + 0.5 * size[1]],
        counts.iter().map(|&c| c as f64).collect(),
    )?;
    Ok(DensityMap { density, suggested })
}

pub fn normal_density_surface(
    model: &SurfaceModel,
    z_range: [f64; 2],
    opts: &NormalDensityOptions,
) -> Result<DensityVolume> {
    opts.validate()?;
    if !(z_range[1] > z_range[0]) {
        return Err(invalid("density z-range must be increasing"));
    }
    let b = model.bounds();
    let n = opts.resolution;
    let size = [
        b.width() / n as f64,
        b.height() / n as f64,
        (z_range[1] - z_range[0]) / n as f64,
    ];
    let lo = [b.x_min, b.y_min, z_range[0]];
    let mut counts = vec![0_u32; n * n * n];
    for [x, y] in b.lattice(opts.samples, opts.samples) {
        let s = model.query_unchecked(x, y);
        cast(
            [x, y, s.z],
            normal_from_gradient(s.p, s.q),
            lo,
            size,
            [n, n, n],
            &mut counts,
        );
    }
    let suggested = strict_maxima(&counts, [n, n, n], opts.min_count, opts.max_suggestions)
        .into_iter()
        .map(|flat| {
            let (j, i, k) = (flat % n, (flat / n) % n, flat / (n * n));
            [
                lo[0] + (j as f64 + 0.5) * size[0],
                lo[1] + (i as f64 + 0.5) * size[1],
                lo[2] + (k as f64 + 0.5) * size[2],
            ]
        })
        .collect();
    Ok(DensityVolume {
        nx: n,
        ny: n,
        nz: n,
        origin: [
            lo[0] + 0.5 * size[0],
            lo[1] + 0.5 * size[1],
            lo[2] + 0.5 * size[2],
        ],
        spacing: size,
        counts,
        suggested,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Bounds;
    use crate::terrain::SurfaceFn;

    #[test]
    fn bowl_normals_meet_at_center() {
        let dom = Domain::new(-0.9, 0.9).unwrap();
        let opts = NormalDensityOptions {
            resolution: 41,
            ..Default::default()
        };
        let map =
            normal_density_curve(&CurveFn::Bowl { radius: 1.0 }, dom, [0.0, 2.0], &opts).unwrap();
        let best = map.suggested[0];
        assert!(
            best[0].abs() < 0.05 && (best[1] - 1.0).abs() < 0.05,
            "{best:?}"
        );
        assert_eq!(map.density.max_abs(), opts.samples as f64);
    }

    #[test]
    fn flat_line_has_no_maxima() {
        let dom = Domain::new(0.0, 1.0).unwrap();
        let opts = NormalDensityOptions {
            resolution: 10,
            samples: 100,
            ..Default::default()
        };
        let map = normal_density_curve(&CurveFn::Line { a: 0.0, b: 0.0 }, dom, [0.0, 1.0], &opts)
            .unwrap();
        assert!(map.suggested.is_empty());
        assert!(map.density.data.iter().all(|&c| c == 10.0));
    }

    #[test]
    fn plane_columns_are_uniform() {
        let model =
            SurfaceModel::analytic(SurfaceFn::flat(), Bounds::square(-1.0, 1.0).unwrap()).unwrap();
        let opts = NormalDensityOptions {
            resolution: 8,
            samples: 40,
            ..Default::default()
        };
        let vol = normal_density_surface(&model, [0.0, 1.0], &opts).unwrap();
        assert!(vol.suggested.is_empty());
        for col in 0..64 {
            let first = vol.counts[col];
            assert!((0..8).all(|k| vol.counts[k * 64 + col] == first));
        }
        assert_eq!(vol.counts.iter().take(64).sum::<u32>(), 1600);
    }

    #[test]
    fn sphere_cap_rays_diverge() {
        // Upward normals of a dome spread out, so the densest cells sit at
        // the surface, not above it.
        let model = SurfaceModel::analytic(
            SurfaceFn::Sphere { radius: 2.0 },
            Bounds::square(-1.0, 1.0).unwrap(),
        )
        .unwrap();
        let opts = NormalDensityOptions {
            resolution: 10,
            samples: 30,
            ..Default::default()
        };
        let vol = normal_density_surface(&model, [1.0, 4.0], &opts).unwrap();
        assert!(vol.suggested.iter().all(|p| p[2] < 2.2));
    }
}
