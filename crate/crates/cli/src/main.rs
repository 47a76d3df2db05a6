//! `orthoplan`: terrain analysis and capture planning from the command line.
//!
//! Exit codes: 0 on success, 2 on usage or input errors, 3 when a fill ends
//! below its coverage target.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "orthoplan",
    version,
    about = "Epsilon-orthographic terrain capture planning"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory receiving all outputs.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Cells per axis of the coverage and partition rasters.
    #[arg(long, global = true)]
    pub grid_res: Option<usize>,
    /// Start from a saved run_config.json; other flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct SurfaceArgs {
    /// Analytic surface: cos, cos2, flat, plane:a,b,c, sphere:a,
    /// pseudosphere:a, parabola:a, ridge:m or expr:<f(x, y)>.
    #[arg(long, conflicts_with = "dem")]
    pub surface: Option<String>,
    /// Elevation map (PGM or PNG) instead of an analytic surface.
    #[arg(long)]
    pub dem: Option<PathBuf>,
    /// Bounds of an analytic surface: x_min,x_max,y_min,y_max.
    #[arg(long, allow_hyphen_values = true)]
    pub bounds: Option<String>,
    /// Odd moving-average window applied to an elevation map.
    #[arg(long)]
    pub smooth: Option<usize>,
    /// Elevation-map pixel spacing: sx,sy.
    #[arg(long)]
    pub spacing: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct OrthoArgs {
    /// Imaging height.
    #[arg(long)]
    pub d: Option<f64>,
    /// Angular field of view, degrees.
    #[arg(long)]
    pub eps_deg: Option<f64>,
    /// Region lattice step along x; defaults to R/20 when d or eps change.
    #[arg(long)]
    pub dx: Option<f64>,
    /// Region lattice step along y.
    #[arg(long)]
    pub dy: Option<f64>,
    /// Ratio between the largest and smallest curvature-driven radius.
    #[arg(long)]
    pub m: Option<f64>,
    /// Predict neighbouring gradients from the center Hessian.
    #[arg(long)]
    pub linearized: bool,
    /// Curvature, imaging and render lattice size.
    #[arg(long)]
    pub res: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionMode {
    Exact,
    Polygon,
    Ellipse,
    CircularAvg,
    CircularCurvature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Batch,
    Sequential,
}

#[derive(Debug, Args, Default)]
pub struct SolverArgs {
    /// Multistart count per solve.
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load an elevation map, optionally smooth it, render its contours.
    Ingest {
        #[command(flatten)]
        surface: SurfaceArgs,
    },
    /// Gaussian and mean curvature over the surface, with Kmax.
    Curvature {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        ortho: OrthoArgs,
    },
    /// Image points at height d along the surface normals.
    ImagingSurface {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        ortho: OrthoArgs,
    },
    /// Largest imaging height at which a curve's imaging curve stays above it.
    HeightBound {
        /// Curve y = f(x), e.g. "x^2" or "sin(x)".
        #[arg(long, alias = "f")]
        curve: String,
        #[arg(long, default_value = "-2,2", allow_hyphen_values = true)]
        domain: String,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        cap: Option<f64>,
        /// Minimum validity samples across the domain.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Epsilon-orthographic region around a point, exact or approximated.
    Region {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        ortho: OrthoArgs,
        /// Center: x,y.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, value_enum, default_value = "exact")]
        mode: RegionMode,
        /// Polygon directions for the approximate modes.
        #[arg(long, default_value_t = orthoplan::ortho::DEFAULT_POLYGON_SIDES)]
        sides: usize,
    },
    /// Fill the surface with capture circles.
    Plan {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        ortho: OrthoArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum)]
        algo: Option<Algo>,
        /// F1, F2, F3, F4, F5, G1 or G2.
        #[arg(long)]
        cost: Option<String>,
        /// F4 overlap weight; without --w1/--w2 F4 uses w1 = 5, w2 = 0.5/N.
        #[arg(long)]
        w1: Option<f64>,
        /// F4 coverage weight.
        #[arg(long)]
        w2: Option<f64>,
        /// Coverage target, percent.
        #[arg(long)]
        target: Option<f64>,
        /// Circles added per sequential iteration (1, 2 or 3).
        #[arg(long)]
        step: Option<usize>,
        /// First circle count for batch filling.
        #[arg(long)]
        n0: Option<usize>,
        /// Circle budget.
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Weighted-sum sweep between overlap and coverage.
    Pareto {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        ortho: OrthoArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Circles per configuration.
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Number of weights swept over [0, 1].
        #[arg(long, default_value_t = 11)]
        points: usize,
    },
    /// Split the covered surface among the circles of a plan.
    Divide {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// plan.json written by `plan`.
        #[arg(long)]
        plan: PathBuf,
    },
    /// Density of surface-normal rays and the capture points it suggests.
    Normals {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Analyze a curve y = f(x) instead of the surface.
        #[arg(long)]
        curve: Option<String>,
        #[arg(long, default_value = "-5,5", allow_hyphen_values = true)]
        domain: String,
        /// Vertical extent of the counting grid: lo,hi.
        #[arg(long, default_value = "-2,6", allow_hyphen_values = true)]
        range: String,
        /// Counting-grid cells per axis.
        #[arg(long, default_value_t = 64)]
        res: usize,
        /// Surface samples per axis.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 2)]
        min_count: u32,
    },
}

/// Outcome of a successful command.
pub enum Status {
    Done,
    TargetUnreachable,
}

fn base_config(global: &GlobalArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = match &global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = global.seed {
        cfg.solver.seed = seed;
    }
    if let Some(dir) = &global.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(res) = global.grid_res {
        cfg.fill.grid_res = res;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = base_config(&cli.global).and_then(|cfg| commands::run(cli.command, cfg));
    match result {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::TargetUnreachable) => {
            eprintln!("warning: coverage target not reached within the circle budget");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
