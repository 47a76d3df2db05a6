//! Subcommand implementations.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use orthoplan::curve::{CurveFn, Domain};
use orthoplan::diffgeo::{
    curvature_field, imaging_surface, max_abs_gaussian_curvature, max_valid_height_1d, HeightBound,
    HeightBoundOptions,
};
use orthoplan::ortho::{
    approx_circular_avg, approx_elliptical, approx_polygonal, approx_radius_curvature,
    surface_ortho_region, RegionBoundary,
};
use orthoplan::partition::{assign_points, decision_boundaries};
use orthoplan::plan::{
    batch_fill, normal_density_curve, normal_density_surface, pareto_front, sequential_fill,
    CapturePlan, CostKind, CostSpec, FillMethod, FillStatus, NormalDensityOptions, PlanContext,
    WeightSchedule,
};
use orthoplan::svg::{contour_levels, SvgCanvas};
use orthoplan::SurfaceModel;
use serde::Serialize;

use crate::config::{parse_bounds, parse_pair, parse_surface_fn, RunConfig, SurfaceSpec};
use crate::output::{contour_canvas, write_json, write_text, CONTOUR_LEVELS, SVG_WIDTH};
use crate::{Algo, Command, OrthoArgs, RegionMode, SolverArgs, Status, SurfaceArgs};

/// Cells per axis of the elevation lattice behind every contour render.
const RENDER_RES: usize = 121;
/// Default lattice step as a fraction of the field-of-view radius.
const STEPS_PER_RADIUS: f64 = 20.0;

pub fn run(command: Command, mut cfg: RunConfig) -> Result<Status> {
    match command {
        Command::Ingest { surface } => {
            if surface.dem.is_none() && !matches!(cfg.surface, SurfaceSpec::Dem { .. }) {
                bail!("ingest needs --dem or a config with an elevation-map surface");
            }
            apply_surface(&surface, &mut cfg)?;
            finish_config(&cfg)?;
            ingest(&cfg)
        }
        Command::Curvature { surface, ortho } => {
            apply_surface(&surface, &mut cfg)?;
            apply_ortho(&ortho, &mut cfg);
            finish_config(&cfg)?;
            curvature(&cfg)
        }
        Command::ImagingSurface { surface, ortho } => {
            apply_surface(&surface, &mut cfg)?;
            apply_ortho(&ortho, &mut cfg);
            finish_config(&cfg)?;
            imaging(&cfg)
        }
        Command::HeightBound {
            curve,
            domain,
            tol,
            cap,
            samples,
        } => {
            finish_config(&cfg)?;
            let mut opts = HeightBoundOptions::default();
            opts.tol = tol.unwrap_or(opts.tol);
            opts.cap = cap.unwrap_or(opts.cap);
            opts.resolution = samples.unwrap_or(opts.resolution);
            height_bound(&cfg, &curve, &domain, opts)
        }
        Command::Region {
            surface,
            ortho,
            point,
            mode,
            sides,
        } => {
            apply_surface(&surface, &mut cfg)?;
            apply_ortho(&ortho, &mut cfg);
            finish_config(&cfg)?;
            region(&cfg, parse_pair(&point)?, mode, sides)
        }
        Command::Plan {
            surface,
            ortho,
            solver,
            algo,
            cost,
            w1,
            w2,
            target,
            step,
            n0,
            n_max,
        } => {
            apply_surface(&surface, &mut cfg)?;
            apply_ortho(&ortho, &mut cfg);
            apply_solver(&solver, &mut cfg);
            if let Some(algo) = algo {
                cfg.algo = match algo {
                    Algo::Batch => FillMethod::Batch,
                    Algo::Sequential => FillMethod::Sequential,
                };
            }
            apply_cost(cost.as_deref(), w1, w2, &mut cfg)?;
            let f = &mut cfg.fill;
            f.coverage_target = target.unwrap_or(f.coverage_target);
            f.step_n = step.unwrap_or(f.step_n);
            f.n0 = n0.unwrap_or(f.n0);
            f.n_max = n_max.unwrap_or(f.n_max);
            finish_config(&cfg)?;
            plan(&cfg)
        }
        Command::Pareto {
            surface,
            ortho,
            solver,
            n,
            points,
        } => {
            apply_surface(&surface, &mut cfg)?;
            apply_ortho(&ortho, &mut cfg);
            apply_solver(&solver, &mut cfg);
            finish_config(&cfg)?;
            pareto(&cfg, n, points)
        }
        Command::Divide { surface, plan } => {
            apply_surface(&surface, &mut cfg)?;
            finish_config(&cfg)?;
            divide(&cfg, &plan)
        }
        Command::Normals {
            surface,
            curve,
            domain,
            range,
            res,
            samples,
            min_count,
        } => {
            apply_surface(&surface, &mut cfg)?;
            finish_config(&cfg)?;
            let opts = NormalDensityOptions {
                resolution: res,
                samples,
                min_count,
                ..Default::default()
            };
            normals(&cfg, curve.as_deref(), &domain, &range, &opts)
        }
    }
}

fn finish_config(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    cfg.write(&cfg.out_dir)
}

fn apply_surface(args: &SurfaceArgs, cfg: &mut RunConfig) -> Result<()> {
    if let Some(path) = &args.dem {
        cfg.surface = SurfaceSpec::dem(path.clone());
    }
    if let Some(name) = &args.surface {
        let bounds = match &cfg.surface {
            SurfaceSpec::Analytic { bounds, .. } => *bounds,
            SurfaceSpec::Dem { .. } => [-5.0, 5.0, -5.0, 5.0],
        };
        cfg.surface = SurfaceSpec::Analytic {
            func: parse_surface_fn(name)?,
            bounds,
        };
    }
    match &mut cfg.surface {
        SurfaceSpec::Analytic { bounds, .. } => {
            if args.smooth.is_some() || args.spacing.is_some() {
                bail!("--smooth and --spacing apply to elevation maps only");
            }
            if let Some(b) = &args.bounds {
                *bounds = parse_bounds(b)?;
            }
        }
        SurfaceSpec::Dem {
            smooth, spacing, ..
        } => {
            if args.bounds.is_some() {
                bail!("--bounds applies to analytic surfaces; use --spacing for elevation maps");
            }
            if let Some(n) = args.smooth {
                *smooth = n;
            }
            if let Some(s) = &args.spacing {
                *spacing = parse_pair(s)?;
            }
        }
    }
    Ok(())
}

fn apply_ortho(args: &OrthoArgs, cfg: &mut RunConfig) {
    let o = &mut cfg.ortho;
    let rescale = args.d.is_some() || args.eps_deg.is_some();
    o.d = args.d.unwrap_or(o.d);
    if let Some(deg) = args.eps_deg {
        o.eps = deg.to_radians();
    }
    if rescale {
        let step = o.radius() / STEPS_PER_RADIUS;
        o.dx = step;
        o.dy = step;
    }
    o.dx = args.dx.unwrap_or(o.dx);
    o.dy = args.dy.or(args.dx).unwrap_or(o.dy);
    o.m = args.m.unwrap_or(o.m);
    o.linearized |= args.linearized;
    cfg.analysis_res = args.res.unwrap_or(cfg.analysis_res);
}

fn apply_solver(args: &SolverArgs, cfg: &mut RunConfig) {
    cfg.solver.n_starts = args.starts.unwrap_or(cfg.solver.n_starts);
    cfg.solver.max_iters = args.max_iters.unwrap_or(cfg.solver.max_iters);
}

fn apply_cost(
    cost: Option<&str>,
    w1: Option<f64>,
    w2: Option<f64>,
    cfg: &mut RunConfig,
) -> Result<()> {
    let kind = match cost {
        Some(s) => s.parse::<CostKind>()?,
        None => cfg.cost.kind,
    };
    cfg.cost = match (kind, w1, w2) {
        (CostKind::F4, Some(a), Some(b)) => CostSpec::f4(a, b)?,
        (CostKind::F4, None, None) if cfg.cost.kind == CostKind::F4 => cfg.cost.clone(),
        (CostKind::F4, None, None) => CostSpec::scheduled(WeightSchedule::default_variable())?,
        (CostKind::F4, _, _) => bail!("F4 needs both --w1 and --w2, or neither"),
        (_, None, None) => CostSpec::new(kind)?,
        (k, _, _) => bail!("--w1/--w2 only apply to F4, not {k}"),
    };
    Ok(())
}

fn ingest(cfg: &RunConfig) -> Result<Status> {
    let model = cfg.surface.load()?;
    let SurfaceModel::Field(f) = &model else {
        unreachable!("ingest loads elevation maps")
    };
    let field = f.field();
    write_json(&cfg.out_dir, "heightfield.json", field)?;
    let canvas = field_canvas(&model, field.grid())?;
    write_text(&cfg.out_dir, "terrain.svg", canvas.finish())?;
    let b = model.bounds();
    println!(
        "heightfield {} x {} over [{}, {}] x [{}, {}]",
        field.rows(),
        field.cols(),
        b.x_min,
        b.x_max,
        b.y_min,
        b.y_max
    );
    Ok(Status::Done)
}

fn field_canvas(model: &SurfaceModel, grid: &orthoplan::grid::Grid) -> Result<SvgCanvas> {
    let mut canvas = SvgCanvas::new(model.bounds(), SVG_WIDTH);
    canvas.contours(grid, &contour_levels(grid, CONTOUR_LEVELS), "#555555");
    Ok(canvas)
}

fn curvature(cfg: &RunConfig) -> Result<Status> {
    let model = cfg.surface.load()?;
    let field = curvature_field(&model, cfg.analysis_res)?;
    write_json(&cfg.out_dir, "curvature.json", &field)?;
    let canvas = field_canvas(&model, &field.gaussian)?;
    write_text(&cfg.out_dir, "curvature.svg", canvas.finish())?;
    println!("Kmax = {}", field.kmax);
    Ok(Status::Done)
}

fn imaging(cfg: &RunConfig) -> Result<Status> {
    let model = cfg.surface.load()?;
    let surf = imaging_surface(&model, cfg.ortho.d, cfg.analysis_res)?;
    write_json(&cfg.out_dir, "imaging_surface.json", &surf)?;
    let mut canvas = contour_canvas(&model, RENDER_RES)?;
    let mut invalid = 0;
    for k in 0..surf.valid.len() {
        if !surf.is_valid(k) {
            invalid += 1;
            let p = surf.point(k);
            canvas.point([p[0], p[1]], "#d62728");
        }
    }
    write_text(&cfg.out_dir, "imaging_surface.svg", canvas.finish())?;
    println!(
        "d = {}: {} of {} image points lie below the surface",
        surf.d,
        invalid,
        surf.valid.len()
    );
    Ok(Status::Done)
}

#[derive(Serialize)]
struct HeightBoundOutput<'a> {
    curve: &'a str,
    domain: [f64; 2],
    options: HeightBoundOptions,
    #[serde(flatten)]
    report: orthoplan::diffgeo::HeightBoundReport,
}

fn height_bound(
    cfg: &RunConfig,
    curve: &str,
    domain: &str,
    opts: HeightBoundOptions,
) -> Result<Status> {
    let f = CurveFn::parse(curve)?;
    let [lo, hi] = parse_pair(domain)?;
    let report = max_valid_height_1d(&f, Domain::new(lo, hi)?, opts)?;
    match report.bound {
        HeightBound::Bounded { d } => println!("D = {d:.4}"),
        HeightBound::Unbounded { cap } => println!("unbounded: valid at the cap d = {cap}"),
    }
    let out = HeightBoundOutput {
        curve,
        domain: [lo, hi],
        options: opts,
        report,
    };
    write_json(&cfg.out_dir, "height_bound.json", &out)?;
    Ok(Status::Done)
}

#[derive(Serialize)]
struct RegionReport {
    mode: &'static str,
    center: [f64; 2],
    fov_radius: f64,
    area: f64,
    /// Radius of the disk with the same area.
    equivalent_radius: f64,
    boundary: RegionBoundary,
}

fn region_area(b: &RegionBoundary, dx: f64, dy: f64) -> f64 {
    match b {
        RegionBoundary::Mask { mask, .. } => {
            mask.valid.iter().filter(|&&v| v == 1).count() as f64 * dx * dy
        }
        RegionBoundary::Polygon { vertices, .. } => {
            let n = vertices.len();
            let twice: f64 = (0..n)
                .map(|i| {
                    let (a, c) = (vertices[i], vertices[(i + 1) % n]);
                    a[0] * c[1] - c[0] * a[1]
                })
                .sum();
            0.5 * twice.abs()
        }
        RegionBoundary::Ellipse { major, minor, .. } => std::f64::consts::PI * major * minor / 4.0,
        RegionBoundary::Circle { radius, .. } => std::f64::consts::PI * radius * radius,
    }
}

fn region(cfg: &RunConfig, center: [f64; 2], mode: RegionMode, sides: usize) -> Result<Status> {
    let model = cfg.surface.load()?;
    let p = &cfg.ortho;
    let (name, boundary) = match mode {
        RegionMode::Exact => ("exact", surface_ortho_region(&model, center, p)?),
        RegionMode::Polygon => ("polygon", approx_polygonal(&model, center, p, sides)?),
        RegionMode::Ellipse => (
            "ellipse",
            approx_elliptical(&approx_polygonal(&model, center, p, sides)?)?,
        ),
        RegionMode::CircularAvg => (
            "circular-avg",
            approx_circular_avg(&approx_polygonal(&model, center, p, sides)?)?,
        ),
        RegionMode::CircularCurvature => {
            let kmax = max_abs_gaussian_curvature(&model, cfg.analysis_res)?;
            let radius = approx_radius_curvature(&model, center, p, kmax)?;
            (
                "circular-curvature",
                RegionBoundary::Circle { center, radius },
            )
        }
    };
    let area = region_area(&boundary, p.dx, p.dy);
    let mut canvas = contour_canvas(&model, RENDER_RES)?;
    draw_region(&mut canvas, &boundary, p.dx, p.dy);
    canvas
        .circle(center, p.radius(), "#999999")
        .point(center, "#d62728");
    write_text(&cfg.out_dir, "region.svg", canvas.finish())?;
    let report = RegionReport {
        mode: name,
        center,
        fov_radius: p.radius(),
        area,
        equivalent_radius: (area / std::f64::consts::PI).sqrt(),
        boundary,
    };
    write_json(&cfg.out_dir, "region.json", &report)?;
    println!(
        "{name} region at ({}, {}): area {:.6}, equivalent radius {:.6}, R = {:.6}",
        center[0], center[1], report.area, report.equivalent_radius, report.fov_radius
    );
    Ok(Status::Done)
}

fn draw_region(canvas: &mut SvgCanvas, b: &RegionBoundary, dx: f64, dy: f64) {
    match b {
        RegionBoundary::Mask { mask, .. } => {
            let g = &mask.grid;
            let cells: Vec<[f64; 2]> = (0..g.rows * g.cols)
                .filter(|&k| mask.valid[k] == 1)
                .map(|k| [g.x_of(k % g.cols), g.y_of(k / g.cols)])
                .collect();
            canvas.cells(&cells, [dx, dy], "#1f77b4");
        }
        RegionBoundary::Polygon { vertices, .. } => {
            canvas.polygon(vertices, "#1f77b4");
        }
        RegionBoundary::Ellipse {
            center,
            major,
            minor,
            angle,
        } => {
            canvas.ellipse(*center, *major, *minor, *angle, "#1f77b4");
        }
        RegionBoundary::Circle { center, radius } => {
            canvas.circle(*center, *radius, "#1f77b4");
        }
    }
}

fn plan_context(cfg: &RunConfig) -> Result<PlanContext> {
    Ok(PlanContext::new(cfg.surface.load()?, cfg.ortho)?)
}

fn plan(cfg: &RunConfig) -> Result<Status> {
    let ctx = plan_context(cfg)?;
    let result = match cfg.algo {
        FillMethod::Batch => batch_fill(&ctx, &cfg.cost, &cfg.solver, &cfg.fill)?,
        FillMethod::Sequential => sequential_fill(&ctx, &cfg.cost, &cfg.solver, &cfg.fill)?,
    };
    write_json(&cfg.out_dir, "plan.json", &result)?;
    write_text(&cfg.out_dir, "history.csv", result.history_csv())?;
    let mut canvas = contour_canvas(&ctx.model, RENDER_RES)?;
    for c in &result.circles {
        canvas.circle(c.center(), c.r, "#1f77b4");
    }
    for c in &result.circles {
        canvas.point(c.center(), "#d62728");
    }
    write_text(&cfg.out_dir, "plan.svg", canvas.finish())?;
    let m = &result.metrics;
    println!(
        "{} circles, {:.2}% covered, overlap {:.4} (closed form) / {:.4} (grid)",
        result.circles.len(),
        m.percent_covered,
        m.overlap_closed_form,
        m.overlap_grid
    );
    Ok(match result.status {
        FillStatus::Reached => Status::Done,
        FillStatus::CapReached => Status::TargetUnreachable,
    })
}

fn pareto(cfg: &RunConfig, n: usize, points: usize) -> Result<Status> {
    let ctx = plan_context(cfg)?;
    let front = pareto_front(&ctx, n, &cfg.solver, points)?;
    write_json(&cfg.out_dir, "pareto.json", &front)?;
    let mut csv = String::from("lambda,f1,f2\n");
    for p in &front {
        let _ = writeln!(csv, "{},{},{}", p.lambda, p.f1, p.f2);
    }
    write_text(&cfg.out_dir, "pareto.csv", csv)?;
    println!("{} nondominated points", front.len());
    Ok(Status::Done)
}

fn divide(cfg: &RunConfig, plan_path: &Path) -> Result<Status> {
    let text = fs::read_to_string(plan_path)
        .with_context(|| format!("cannot read plan {}", plan_path.display()))?;
    let plan: CapturePlan = serde_json::from_str(&text)
        .with_context(|| format!("invalid plan {}", plan_path.display()))?;
    let model = cfg.surface.load()?;
    let labels = assign_points(&plan.circles, &model.bounds(), cfg.fill.grid_res)?;
    let segments = decision_boundaries(&plan.circles);
    write_json(&cfg.out_dir, "labels.json", &labels)?;
    write_text(&cfg.out_dir, "labels.pgm", labels.to_pgm(true))?;
    write_json(&cfg.out_dir, "boundaries.json", &segments)?;
    let mut canvas = contour_canvas(&model, RENDER_RES)?;
    for c in &plan.circles {
        canvas.circle(c.center(), c.r, "#1f77b4");
    }
    for s in &segments {
        canvas.segment(s.a, s.b, "#2ca02c");
    }
    for c in &plan.circles {
        canvas.point(c.center(), "#d62728");
    }
    write_text(&cfg.out_dir, "divide.svg", canvas.finish())?;
    println!(
        "{} regions, {} boundary segments, {} unassigned cells",
        plan.circles.len(),
        segments.len(),
        labels.unassigned()
    );
    Ok(Status::Done)
}

fn normals(
    cfg: &RunConfig,
    curve: Option<&str>,
    domain: &str,
    range: &str,
    opts: &NormalDensityOptions,
) -> Result<Status> {
    let range = parse_pair(range)?;
    match curve {
        Some(src) => {
            let f = CurveFn::parse(src)?;
            let [lo, hi] = parse_pair(domain)?;
            let dom = Domain::new(lo, hi)?;
            let map = normal_density_curve(&f, dom, range, opts)?;
            write_json(&cfg.out_dir, "normals.json", &map)?;
            let bounds = orthoplan::Bounds::new(lo, hi, range[0], range[1])?;
            let mut canvas = SvgCanvas::new(bounds, SVG_WIDTH);
            canvas.contours(
                &map.density,
                &contour_levels(&map.density, CONTOUR_LEVELS),
                "#888888",
            );
            let xs: Vec<f64> = dom.samples(400).collect();
            for w in xs.windows(2) {
                canvas.segment([w[0], f.value(w[0])], [w[1], f.value(w[1])], "#000000");
            }
            for &p in &map.suggested {
                canvas.point(p, "#d62728");
            }
            write_text(&cfg.out_dir, "normals.svg", canvas.finish())?;
            println!("{} suggested capture points", map.suggested.len());
        }
        None => {
            let model = cfg.surface.load()?;
            let vol = normal_density_surface(&model, range, opts)?;
            write_json(&cfg.out_dir, "normals.json", &vol)?;
            let mut canvas = contour_canvas(&model, RENDER_RES)?;
            for p in &vol.suggested {
                canvas.point([p[0], p[1]], "#d62728");
            }
            write_text(&cfg.out_dir, "normals.svg", canvas.finish())?;
            println!("{} suggested capture points", vol.suggested.len());
        }
    }
    Ok(Status::Done)
}
