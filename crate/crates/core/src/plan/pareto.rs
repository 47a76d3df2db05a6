//! Overlap/coverage trade-off by weighted-sum scalarization.
//!
//! With `f1 = deficit` and `f2 = deficit − cov_rel`, the scalarized cost
//! `λ·f1 + (1 − λ)·f2` equals `deficit − (1 − λ)·cov_rel`.

use serde::{Deserialize, Serialize};

use super::cost::{cost_terms, CostSpec, WeightSchedule};
use super::solver::{multistart, Objective, SolverConfig};
use super::PlanContext;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub centers: Vec<[f64; 2]>,
    pub f1: f64,
    pub f2: f64,
    /// Weight on `f1` of the scalarized problem that produced this point.
    pub lambda: f64,
}

/// `a` dominates `b`: no worse in both objectives, strictly better in one.
fn dominates(a: &ParetoPoint, b: &ParetoPoint) -> bool {
    a.f1 <= b.f1 && a.f2 <= b.f2 && (a.f1 < b.f1 || a.f2 < b.f2)
}

/// Nondominated subset with duplicate objective pairs removed, sorted by
/// `f1` ascending.
pub fn nondominated(mut points: Vec<ParetoPoint>) -> Vec<ParetoPoint> {
    points.sort_by(|a, b| a.f1.total_cmp(&b.f1).then(a.f2.total_cmp(&b.f2)));
    points.dedup_by(|b, a| a.f1 == b.f1 && a.f2 == b.f2);
    let keep: Vec<bool> = points
        .iter()
        .map(|p| !points.iter().any(|q| dominates(q, p)))
        .collect();
    points
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect()
}

/// Solves the scalarized problem for `n_points` evenly spaced `λ ∈ [0, 1]`
/// by multistart and returns the nondominated local solutions.
pub fn pareto_front(
    ctx: &PlanContext,
    n: usize,
    cfg: &SolverConfig,
    n_points: usize,
) -> Result<Vec<ParetoPoint>> {
    if n_points < 2 {
        return Err(invalid(format!(
            "Pareto sweep needs at least 2 weights, got {n_points}"
        )));
    }
    let big_r = ctx.max_radius();
    let mut points = Vec::new();
    for k in 0..n_points {
        let lambda = k as f64 / (n_points - 1) as f64;
        let spec = CostSpec::scheduled(WeightSchedule::Fixed {
            w1: 1.0,
            w2: 1.0 - lambda,
        })?;
        let res = multistart(&Objective::new(ctx, &spec), n, cfg)?;
        for sol in res.all {
            let t = cost_terms(&sol.circles, &[], big_r);
            points.push(ParetoPoint {
                centers: sol.centers,
                f1: t.deficit,
                f2: t.deficit - t.cov_rel,
                lambda,
            });
        }
    }
    Ok(nondominated(points))
}
