//! Elevation map to divided capture plan, through the library API.

use orthoplan::ortho::{surface_ortho_region, OrthoParams};
use orthoplan::partition::assign_points;
use orthoplan::plan::{
    batch_fill, CostKind, CostSpec, FillOptions, FillStatus, PlanContext, SolverConfig,
};
use orthoplan::terrain::{load_dem, mean_smooth, DemFormat};
use orthoplan::SurfaceModel;

/// A 40 × 40 ASCII PGM of a smooth bump.
fn bump_pgm() -> Vec<u8> {
    let n = 40;
    let mut s = format!("P2\n{n} {n}\n255\n");
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| {
                let (x, y) = (j as f64 - 19.5, i as f64 - 19.5);
                let v = 200.0 * (-(x * x + y * y) / 120.0).exp();
                (v.round() as u8).to_string()
            })
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s.into_bytes()
}

#[test]
fn dem_to_divided_plan() {
    let bytes = bump_pgm();
    let format = DemFormat::detect(&bytes).unwrap();
    assert_eq!(format, DemFormat::PgmAscii);
    let field = load_dem(&bytes, format).unwrap();
    let field = mean_smooth(&field, 3)
        .unwrap()
        .with_geometry([0.25, 0.25], [0.0, 0.0])
        .unwrap();
    let model: SurfaceModel = field.into();
    let b = model.bounds();
    assert_eq!((b.x_max, b.y_max), (9.75, 9.75));

    let params = OrthoParams::with_resolution(30.0, 5f64.to_radians(), 12.0).unwrap();
    let region = surface_ortho_region(&model, [5.0, 5.0], &params).unwrap();
    assert!(region.cell_count().unwrap() > 0);

    let ctx = PlanContext::new(model, params).unwrap();
    assert!(ctx.kmax > 0.0);
    let spec = CostSpec::new(CostKind::F2).unwrap();
    let opts = FillOptions {
        coverage_target: 60.0,
        grid_res: 120,
        ..Default::default()
    };
    let cfg = SolverConfig {
        n_starts: 2,
        seed: 1,
        ..Default::default()
    };
    let plan = batch_fill(&ctx, &spec, &cfg, &opts).unwrap();
    assert_eq!(plan.status, FillStatus::Reached);
    for c in &plan.circles {
        assert!(b.contains(c.x, c.y));
        assert!(c.r <= ctx.max_radius() && c.r >= ctx.max_radius() / params.m - 1e-12);
    }

    let labels = assign_points(&plan.circles, &b, 120).unwrap();
    let covered = labels.data.iter().filter(|&&v| v >= 0).count();
    let pct = 100.0 * covered as f64 / (120.0 * 120.0);
    assert!(
        (pct - plan.metrics.percent_covered).abs() < 1e-9,
        "{pct} vs {}",
        plan.metrics.percent_covered
    );
}
