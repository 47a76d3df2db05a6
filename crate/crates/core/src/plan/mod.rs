//! Choosing capture points whose circular regions cover the surface.

mod cost;
mod fill;
mod metrics;
mod normals;
mod overlap;
mod pareto;
mod solver;

pub use cost::{cost_terms, Coefficients, CostKind, CostSpec, CostTerms, WeightSchedule};
pub use fill::{
    batch_fill, fill_seed, sequential_fill, CapturePlan, FillMethod, FillOptions, FillStatus,
    FillStep, Provenance,
};
pub use metrics::{coverage_counts, coverage_metrics, CoverageMetrics, DEFAULT_GRID_RES};
pub use normals::{
    normal_density_curve, normal_density_surface, DensityMap, DensityVolume, NormalDensityOptions,
};
pub use overlap::circle_overlap_area;
pub use pareto::{nondominated, pareto_front, ParetoPoint};
pub use solver::{
    local_optimize, multistart, random_centers, LocalResult, MultistartResult, Objective,
    SolverConfig,
};

use serde::{Deserialize, Serialize};

use crate::diffgeo::{gaussian_from_query, max_abs_gaussian_curvature, DEFAULT_KMAX_RES};
use crate::error::{Error, Result};
use crate::geometry::Bounds;
use crate::ortho::{radius_from_curvature, OrthoParams};
use crate::terrain::SurfaceModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

impl Circle {
    pub fn center(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - self.x, y - self.y);
        dx * dx + dy * dy <= self.r * self.r
    }
}

/// Surface, imaging parameters and the curvature scale shared by every
/// planning step. Region radii follow the curvature-driven circular model.
#[derive(Debug, Clone)]
pub struct PlanContext {
    pub model: SurfaceModel,
    pub params: OrthoParams,
    pub kmax: f64,
}

impl PlanContext {
    /// Estimates `Kmax` on the default curvature lattice.
    pub fn new(model: SurfaceModel, params: OrthoParams) -> Result<Self> {
        let kmax = max_abs_gaussian_curvature(&model, DEFAULT_KMAX_RES)?;
        Self::with_kmax(model, params, kmax)
    }

    pub fn with_kmax(model: SurfaceModel, params: OrthoParams, kmax: f64) -> Result<Self> {
        params.validate()?;
        if !(kmax >= 0.0 && kmax.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Kmax must be finite and >= 0, got {kmax}"
            )));
        }
        Ok(Self {
            model,
            params,
            kmax,
        })
    }

    pub fn bounds(&self) -> Bounds {
        self.model.bounds()
    }

    /// `R = d·tan ε`.
    pub fn max_radius(&self) -> f64 {
        self.params.radius()
    }

    /// Region radius at a point inside the bounds.
    pub fn radius_at(&self, x: f64, y: f64) -> f64 {
        let k = gaussian_from_query(&self.model.query_unchecked(x, y));
        radius_from_curvature(k, self.kmax, self.max_radius(), self.params.m)
    }

    pub fn circle_at(&self, center: [f64; 2]) -> Result<Circle> {
        self.bounds().check(center[0], center[1])?;
        Ok(Circle {
            x: center[0],
            y: center[1],
            r: self.radius_at(center[0], center[1]),
        })
    }

    pub fn circles(&self, centers: &[[f64; 2]]) -> Result<Vec<Circle>> {
        centers.iter().map(|&c| self.circle_at(c)).collect()
    }
}

/// Cost of the configuration `centers` under `spec`.
pub fn evaluate_cost(centers: &[[f64; 2]], spec: &CostSpec, ctx: &PlanContext) -> Result<f64> {
    spec.validate()?;
    let circles = ctx.circles(centers)?;
    let terms = cost_terms(&circles, &[], ctx.max_radius());
    Ok(spec.combine(&terms, circles.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::SurfaceFn;

    const DEG: f64 = std::f64::consts::PI / 180.0;

    fn cos_ctx() -> PlanContext {
        let model =
            SurfaceModel::analytic(SurfaceFn::CosSum, Bounds::square(-5.0, 5.0).unwrap()).unwrap();
        PlanContext::new(
            model,
            OrthoParams::new(3.0, 10.0 * DEG, 0.01, 0.01).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn radii_follow_curvature() {
        let ctx = cos_ctx();
        let big_r = ctx.max_radius();
        // K = 1 = Kmax at the peak, K = 0 where cos x = 0.
        assert!((ctx.radius_at(0.0, 0.0) - big_r / 5.0).abs() < 1e-9);
        let flat = ctx.radius_at(std::f64::consts::FRAC_PI_2, 0.3);
        assert!((flat - big_r).abs() < 1e-12);
    }

    #[test]
    fn cost_examples() {
        let model =
            SurfaceModel::analytic(SurfaceFn::flat(), Bounds::square(-5.0, 5.0).unwrap()).unwrap();
        let ctx = PlanContext::new(
            model,
            OrthoParams::new(3.0, 10.0 * DEG, 0.01, 0.01).unwrap(),
        )
        .unwrap();
        let f2 = CostSpec::new(CostKind::F2).unwrap();
        assert_eq!(
            evaluate_cost(&[[0.0, 0.0]], &f2, &ctx).unwrap(),
            -std::f64::consts::PI
        );
        let f1 = CostSpec::new(CostKind::F1).unwrap();
        assert_eq!(
            evaluate_cost(&[[0.0, 0.0], [2.0, 0.0]], &f1, &ctx).unwrap(),
            0.0
        );
        let f5 = CostSpec::new(CostKind::F5).unwrap();
        let r = ctx.max_radius();
        let want = -2.0 * std::f64::consts::PI * r * r;
        assert!(
            (evaluate_cost(&[[0.0, 0.0], [2.0, 0.0]], &f5, &ctx).unwrap() - want).abs() < 1e-15
        );
        assert!(evaluate_cost(&[[6.0, 0.0]], &f1, &ctx).is_err());
    }
}
