//! Serializable run configuration. Every command writes the configuration it
//! ran with, and `--config` reloads it.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use orthoplan::expr::Expr;
use orthoplan::ortho::OrthoParams;
use orthoplan::plan::{CostKind, CostSpec, FillMethod, FillOptions, SolverConfig};
use orthoplan::terrain::{load_dem, mean_smooth, DemFormat};
use orthoplan::{Bounds, SurfaceFn, SurfaceModel};
use serde::{Deserialize, Serialize};

pub const DEFAULT_ANALYSIS_RES: usize = 201;

/// Where the surface comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum SurfaceSpec {
    Analytic {
        func: SurfaceFn,
        /// `[x_min, x_max, y_min, y_max]`.
        bounds: [f64; 4],
    },
    Dem {
        path: PathBuf,
        /// Odd moving-average window; 1 leaves the map untouched.
        smooth: usize,
        spacing: [f64; 2],
        origin: [f64; 2],
    },
}

impl Default for SurfaceSpec {
    fn default() -> Self {
        SurfaceSpec::Analytic {
            func: SurfaceFn::CosSum,
            bounds: [-5.0, 5.0, -5.0, 5.0],
        }
    }
}

impl SurfaceSpec {
    pub fn dem(path: PathBuf) -> Self {
        SurfaceSpec::Dem {
            path,
            smooth: 1,
            spacing: [1.0, 1.0],
            origin: [0.0, 0.0],
        }
    }

    pub fn load(&self) -> Result<SurfaceModel> {
        match self {
            SurfaceSpec::Analytic { func, bounds } => {
                let b = Bounds::new(bounds[0], bounds[1], bounds[2], bounds[3])?;
                Ok(SurfaceModel::analytic(func.clone(), b)?)
            }
            SurfaceSpec::Dem {
                path,
                smooth,
                spacing,
                origin,
            } => {
                let field = read_dem(path)?;
                let field = if *smooth > 1 {
                    mean_smooth(&field, *smooth)?
                } else {
                    field
                };
                Ok(field.with_geometry(*spacing, *origin)?.into())
            }
        }
    }
}

pub fn read_dem(path: &Path) -> Result<orthoplan::HeightField> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let format = DemFormat::detect(&bytes)
        .with_context(|| format!("{} is not a PGM (P2/P5) or PNG file", path.display()))?;
    Ok(load_dem(&bytes, format)?)
}

/// Parses `cos`, `cos2`, `plane:a,b,c`, `sphere:a`, `pseudosphere:a`,
/// `parabola:a`, `ridge:m` or `expr:<expression in x, y>`.
pub fn parse_surface_fn(s: &str) -> Result<SurfaceFn> {
    let (name, args) = s.split_once(':').unwrap_or((s, ""));
    if name == "expr" {
        return Ok(SurfaceFn::Expr {
            expr: Expr::parse(args)?,
        });
    }
    let nums = parse_floats(args)?;
    let arg = |k: usize, default: f64| nums.get(k).copied().unwrap_or(default);
    let func = match name {
        "cos" => SurfaceFn::CosSum,
        "cos2" => SurfaceFn::CosSquaredSum,
        "flat" => SurfaceFn::flat(),
        "plane" => SurfaceFn::Plane {
            a: arg(0, 0.0),
            b: arg(1, 0.0),
            c: arg(2, 0.0),
        },
        "sphere" => SurfaceFn::Sphere {
            radius: arg(0, 2.0),
        },
        "pseudosphere" => SurfaceFn::Pseudosphere {
            radius: arg(0, 1.0),
        },
        "parabola" => SurfaceFn::Parabola { a: arg(0, 1.0) },
        "ridge" => SurfaceFn::Ridge { slope: arg(0, 1.0) },
        other => bail!("unknown surface '{other}'"),
    };
    Ok(func)
}

pub fn parse_floats(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("'{t}' is not a number"))
        })
        .collect()
}

pub fn parse_pair(s: &str) -> Result<[f64; 2]> {
    match parse_floats(s)?.as_slice() {
        &[a, b] => Ok([a, b]),
        _ => bail!("expected two comma-separated numbers, got '{s}'"),
    }
}

pub fn parse_bounds(s: &str) -> Result<[f64; 4]> {
    match parse_floats(s)?.as_slice() {
        &[a, b, c, d] => Ok([a, b, c, d]),
        _ => bail!("expected x_min,x_max,y_min,y_max, got '{s}'"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub surface: SurfaceSpec,
    pub ortho: OrthoParams,
    pub cost: CostSpec,
    pub solver: SolverConfig,
    pub fill: FillOptions,
    pub algo: FillMethod,
    /// Lattice size for curvature, imaging surfaces and renders.
    pub analysis_res: usize,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let (d, eps) = (3.0, 10.0 * PI / 180.0);
        let step = d * eps.tan() / 20.0;
        Self {
            surface: SurfaceSpec::default(),
            ortho: OrthoParams::new(d, eps, step, step).expect("default imaging parameters"),
            cost: CostSpec::new(CostKind::F3).expect("F3 needs no weights"),
            solver: SolverConfig::default(),
            fill: FillOptions::default(),
            algo: FillMethod::Batch,
            analysis_res: DEFAULT_ANALYSIS_RES,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        self.ortho.validate()?;
        self.cost.validate()?;
        self.solver.validate()?;
        if self.analysis_res < 2 {
            bail!("analysis resolution must be at least 2");
        }
        if self.fill.grid_res < 2 {
            bail!("grid resolution must be at least 2");
        }
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        crate::output::write_json(dir, "run_config.json", self)
    }
}
