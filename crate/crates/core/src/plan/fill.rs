//! Batch and sequential circle filling.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::cost::CostSpec;
use super::metrics::{coverage_metrics, CoverageMetrics, DEFAULT_GRID_RES};
use super::solver::{multistart, Objective, SolverConfig};
use super::{Circle, PlanContext};
use crate::error::{invalid, Result};

/// Circle budget when none is given.
pub const DEFAULT_N_MAX: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FillOptions {
    /// Coverage goal, percent of the bound rectangle.
    pub coverage_target: f64,
    /// First circle count tried by batch filling.
    pub n0: usize,
    pub n_max: usize,
    pub grid_res: usize,
    /// Circles added per sequential iteration.
    pub step_n: usize,
}

impl Default for FillOptions {
    fn default() -> Self {
        Self {
            coverage_target: 90.0,
            n0: 1,
            n_max: DEFAULT_N_MAX,
            grid_res: DEFAULT_GRID_RES,
            step_n: 1,
        }
    }
}

impl FillOptions {
    fn validate(&self) -> Result<()> {
        if !(self.coverage_target > 0.0 && self.coverage_target <= 100.0) {
            return Err(invalid(format!(
                "coverage target must lie in (0, 100], got {}",
                self.coverage_target
            )));
        }
        if self.n0 == 0 || self.n0 > self.n_max {
            return Err(invalid(format!(
                "need 1 <= N0 <= N_max, got {} and {}",
                self.n0, self.n_max
            )));
        }
        if self.grid_res < 2 {
            return Err(invalid("coverage grid needs at least 2 cells per axis"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillStatus {
    Reached,
    /// The circle budget ran out below the coverage target.
    CapReached,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillMethod {
    Batch,
    Sequential,
}

/// State after one filling iteration. For sequential filling the first `n`
/// circles of the final plan are exactly the configuration at that step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FillStep {
    pub n: usize,
    pub cost: f64,
    pub metrics: CoverageMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: FillMethod,
    pub cost: CostSpec,
    pub solver: String,
    pub n_starts: usize,
    pub seed: u64,
    pub history: Vec<FillStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapturePlan {
    pub circles: Vec<Circle>,
    pub metrics: CoverageMetrics,
    pub status: FillStatus,
    pub provenance: Provenance,
}

impl CapturePlan {
    /// One CSV row per filling iteration.
    pub fn history_csv(&self) -> String {
        let mut out =
            String::from("n,cost,area_covered,percent_covered,overlap_closed_form,overlap_grid\n");
        for s in &self.provenance.history {
            let m = &s.metrics;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.n,
                s.cost,
                m.area_covered,
                m.percent_covered,
                m.overlap_closed_form,
                m.overlap_grid
            );
        }
        out
    }
}

/// Seed for the solve at circle count `n`, so each count draws an
/// independent start stream from the run seed.
pub fn fill_seed(seed: u64, n: usize) -> u64 {
    let mut z = seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SOLVER_NAME: &str = "compass-search";

/// Optimizes `N` circles jointly from fresh random starts, raising `N` by one
/// until the coverage target is met or `N_max` is exhausted.
pub fn batch_fill(
    ctx: &PlanContext,
    spec: &CostSpec,
    cfg: &SolverConfig,
    opts: &FillOptions,
) -> Result<CapturePlan> {
    opts.validate()?;
    cfg.validate()?;
    spec.validate()?;
    let bounds = ctx.bounds();
    let obj = Objective::new(ctx, spec);
    let mut history = Vec::new();
    let mut last = None;
    for n in opts.n0..=opts.n_max {
        let run = SolverConfig {
            seed: fill_seed(cfg.seed, n),
            ..*cfg
        };
        let best = multistart(&obj, n, &run)?.best;
        let metrics = coverage_metrics(&best.circles, &bounds, opts.grid_res);
        history.push(FillStep {
            n,
            cost: best.cost,
            metrics,
        });
        let reached = metrics.percent_covered >= opts.coverage_target;
        last = Some((best.circles, metrics));
        if reached {
            break;
        }
    }
    let (circles, metrics) = last.expect("n0 <= n_max guarantees one iteration");
    Ok(finish(
        circles,
        metrics,
        opts,
        FillMethod::Batch,
        spec,
        cfg,
        history,
    ))
}

/// Adds `step_n` circles per iteration, optimizing only the new ones against
/// the frozen set, until the coverage target is met or `N_max` is reached.
pub fn sequential_fill(
    ctx: &PlanContext,
    spec: &CostSpec,
    cfg: &SolverConfig,
    opts: &FillOptions,
) -> Result<CapturePlan> {
    opts.validate()?;
    cfg.validate()?;
    spec.validate()?;
    if !(1..=3).contains(&opts.step_n) {
        return Err(invalid(format!(
            "sequential step must be 1, 2 or 3, got {}",
            opts.step_n
        )));
    }
    let bounds = ctx.bounds();
    let mut placed: Vec<Circle> = Vec::new();
    let mut history = Vec::new();
    let mut metrics = CoverageMetrics::default();
    while placed.len() < opts.n_max {
        let k = opts.step_n.min(opts.n_max - placed.len());
        let run = SolverConfig {
            seed: fill_seed(cfg.seed, placed.len() + k),
            ..*cfg
        };
        let best = multistart(&Objective::new(ctx, spec).with_frozen(&placed), k, &run)?.best;
        placed.extend(best.circles);
        metrics = coverage_metrics(&placed, &bounds, opts.grid_res);
        let cost = Objective::new(ctx, spec).cost_of(&placed);
        history.push(FillStep {
            n: placed.len(),
            cost,
            metrics,
        });
        if metrics.percent_covered >= opts.coverage_target {
            break;
        }
    }
    Ok(finish(
        placed,
        metrics,
        opts,
        FillMethod::Sequential,
        spec,
        cfg,
        history,
    ))
}

fn finish(
    circles: Vec<Circle>,
    metrics: CoverageMetrics,
    opts: &FillOptions,
    method: FillMethod,
    spec: &CostSpec,
    cfg: &SolverConfig,
    history: Vec<FillStep>,
) -> CapturePlan {
    let status = if metrics.percent_covered >= opts.coverage_target {
        FillStatus::Reached
    } else {
        FillStatus::CapReached
    };
    CapturePlan {
        circles,
        metrics,
        status,
        provenance: Provenance {
            method,
            cost: spec.clone(),
            solver: SOLVER_NAME.to_string(),
            n_starts: cfg.n_starts,
            seed: cfg.seed,
            history,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Bounds;
    use crate::ortho::OrthoParams;
    use crate::plan::CostKind;
    use crate::terrain::{SurfaceFn, SurfaceModel};

    const DEG: f64 = std::f64::consts::PI / 180.0;

    fn plane_ctx(half: f64) -> PlanContext {
        let model = SurfaceModel::analytic(SurfaceFn::flat(), Bounds::square(-half, half).unwrap())
            .unwrap();
        PlanContext::new(
            model,
            OrthoParams::new(3.0, 10.0 * DEG, 0.01, 0.01).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn seeds_differ_per_count() {
        assert_ne!(fill_seed(0, 1), fill_seed(0, 2));
        assert_ne!(fill_seed(1, 1), fill_seed(0, 1));
        assert_eq!(fill_seed(7, 3), fill_seed(7, 3));
    }

    #[test]
    fn option_validation() {
        let ctx = plane_ctx(1.0);
        let spec = CostSpec::new(CostKind::F2).unwrap();
        let cfg = SolverConfig::default();
        let bad = FillOptions {
            coverage_target: 0.0,
            ..Default::default()
        };
        assert!(batch_fill(&ctx, &spec, &cfg, &bad).is_err());
        let bad = FillOptions {
            step_n: 4,
            ..Default::default()
        };
        assert!(sequential_fill(&ctx, &spec, &cfg, &bad).is_err());
    }

    #[test]
    fn batch_history_steps_by_one() {
        let ctx = plane_ctx(1.5);
        let spec = CostSpec::new(CostKind::F3).unwrap();
        let cfg = SolverConfig::default();
        let opts = FillOptions {
            coverage_target: 60.0,
            n0: 2,
            grid_res: 100,
            ..Default::default()
        };
        let plan = batch_fill(&ctx, &spec, &cfg, &opts).unwrap();
        let ns: Vec<usize> = plan.provenance.history.iter().map(|s| s.n).collect();
        assert_eq!(ns[0], 2);
        assert!(ns.windows(2).all(|w| w[1] == w[0] + 1));
        assert_eq!(plan.status, FillStatus::Reached);
        assert!(plan.metrics.percent_covered >= 60.0);
        assert_eq!(plan.circles.len(), *ns.last().unwrap());
    }

    #[test]
    fn cap_is_reported() {
        let ctx = plane_ctx(5.0);
        let spec = CostSpec::new(CostKind::F2).unwrap();
        let opts = FillOptions {
            coverage_target: 99.0,
            n0: 1,
            n_max: 3,
            grid_res: 80,
            step_n: 2,
        };
        let cfg = SolverConfig::default();
        let plan = batch_fill(&ctx, &spec, &cfg, &opts).unwrap();
        assert_eq!(plan.status, FillStatus::CapReached);
        assert_eq!(plan.circles.len(), 3);
        let seq = sequential_fill(&ctx, &spec, &cfg, &opts).unwrap();
        assert_eq!(seq.status, FillStatus::CapReached);
        assert_eq!(seq.circles.len(), 3);
        let ns: Vec<usize> = seq.provenance.history.iter().map(|s| s.n).collect();
        assert_eq!(ns, vec![2, 3]);
    }

    #[test]
    fn first_sequential_circle_on_plane() {
        let ctx = plane_ctx(5.0);
        let spec = CostSpec::new(CostKind::F2).unwrap();
        let opts = FillOptions {
            coverage_target: 0.5,
            grid_res: 100,
            ..Default::default()
        };
        let plan = sequential_fill(&ctx, &spec, &SolverConfig::default(), &opts).unwrap();
        assert_eq!(plan.circles.len(), 1);
        assert_eq!(plan.provenance.history[0].cost, -std::f64::consts::PI);
        assert_eq!(plan.circles[0].r, ctx.max_radius());
    }

    #[test]
    fn csv_has_row_per_step() {
        let ctx = plane_ctx(5.0);
        let spec = CostSpec::new(CostKind::F1).unwrap();
        let opts = FillOptions {
            coverage_target: 100.0,
            n0: 1,
            n_max: 2,
            grid_res: 50,
            step_n: 1,
        };
        let plan = batch_fill(&ctx, &spec, &SolverConfig::default(), &opts).unwrap();
        let csv = plan.history_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("n,cost,"));
    }
}
