//! Derivative-free compass search with box projection, and its multistart
//! driver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cost::{cost_terms, Coefficients, CostSpec};
use super::{Circle, PlanContext};
use crate::error::{invalid, Result};
use crate::geometry::Bounds;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Upper limit on full sweeps over the circles.
    pub max_iters: usize,
    /// Initial compass step, in surface length units.
    pub step_init: f64,
    /// Search stops once the step falls below this.
    pub step_tol: f64,
    pub n_starts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            step_init: 0.5,
            step_tol: 1e-4,
            n_starts: 1,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.n_starts == 0 {
            return Err(invalid("solver needs max_iters >= 1 and n_starts >= 1"));
        }
        if !(self.step_init > 0.0 && self.step_tol > 0.0 && self.step_init.is_finite()) {
            return Err(invalid("solver steps must be positive and finite"));
        }
        Ok(())
    }
}

/// Cost of a set of movable circles against an optional frozen set.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    pub ctx: &'a PlanContext,
    pub spec: &'a CostSpec,
    pub frozen: &'a [Circle],
}

impl<'a> Objective<'a> {
    pub fn new(ctx: &'a PlanContext, spec: &'a CostSpec) -> Self {
        Self {
            ctx,
            spec,
            frozen: &[],
        }
    }

    pub fn with_frozen(mut self, frozen: &'a [Circle]) -> Self {
        self.frozen = frozen;
        self
    }

    pub fn cost_of(&self, circles: &[Circle]) -> f64 {
        let terms = cost_terms(circles, self.frozen, self.ctx.max_radius());
        self.spec.combine(&terms, circles.len() + self.frozen.len())
    }

    pub fn evaluate(&self, centers: &[[f64; 2]]) -> Result<f64> {
        Ok(self.cost_of(&self.ctx.circles(centers)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalResult {
    pub centers: Vec<[f64; 2]>,
    pub circles: Vec<Circle>,
    pub cost: f64,
    /// Cost at the start and after every sweep.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub final_step: f64,
}

const DIRECTIONS: [[f64; 2]; 4] = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];

/// Compass search from `x0`. Each sweep tries the four axis moves for every
/// circle in turn and keeps the first that lowers the cost; a sweep with no
/// accepted move halves the step.
pub fn local_optimize(obj: &Objective, x0: &[[f64; 2]], cfg: &SolverConfig) -> Result<LocalResult> {
    cfg.validate()?;
    obj.spec.validate()?;
    if x0.is_empty() {
        return Err(invalid("local search needs at least one center"));
    }
    let ctx = obj.ctx;
    let bounds = ctx.bounds();
    let big_r = ctx.max_radius();
    let coeffs = obj.spec.coefficients(x0.len() + obj.frozen.len());
    let mut circles = ctx.circles(x0)?;
    let mut cost = obj.cost_of(&circles);
    let mut trace = vec![cost];
    let mut step = cfg.step_init;
    let mut iterations = 0;

    while step >= cfg.step_tol && iterations < cfg.max_iters {
        iterations += 1;
        let mut improved = false;
        for i in 0..circles.len() {
            let current = circles[i];
            let before = contribution(&coeffs, &circles, obj.frozen, i, &current, big_r);
            for dir in DIRECTIONS {
                let [x, y] = bounds.clamp(current.x + step * dir[0], current.y + step * dir[1]);
                if x == current.x && y == current.y {
                    continue;
                }
                let cand = Circle {
                    x,
                    y,
                    r: ctx.radius_at(x, y),
                };
                let after = contribution(&coeffs, &circles, obj.frozen, i, &cand, big_r);
                if after - before < -1e-12 * (1.0 + cost.abs()) {
                    circles[i] = cand;
                    cost += after - before;
                    improved = true;
                    break;
                }
            }
        }
        cost = obj.cost_of(&circles);
        trace.push(cost);
        if !improved {
            step *= 0.5;
        }
    }

    Ok(LocalResult {
        centers: circles.iter().map(Circle::center).collect(),
        circles,
        cost,
        trace,
        iterations,
        final_step: step,
    })
}

/// Every cost term involving circle `i` when it is replaced by `c`.
fn contribution(
    k: &Coefficients,
    circles: &[Circle],
    frozen: &[Circle],
    i: usize,
    c: &Circle,
    big_r: f64,
) -> f64 {
    let mut v = k.own(c, big_r);
    for (j, other) in circles.iter().enumerate() {
        if j != i {
            v += k.pair(c, other);
        }
    }
    for other in frozen {
        v += k.pair(c, other);
    }
    v
}

pub fn random_centers(rng: &mut impl Rng, bounds: &Bounds, n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| {
            [
                rng.gen_range(bounds.x_min..=bounds.x_max),
                rng.gen_range(bounds.y_min..=bounds.y_max),
            ]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartResult {
    pub best_index: usize,
    pub best: LocalResult,
    /// Every local solution, in start order.
    pub all: Vec<LocalResult>,
}

/// `cfg.n_starts` local searches from uniform random starts drawn in
/// sequence from `cfg.seed`. The lowest cost wins, earliest start on ties.
pub fn multistart(obj: &Objective, n: usize, cfg: &SolverConfig) -> Result<MultistartResult> {
    cfg.validate()?;
    if n == 0 {
        return Err(invalid("multistart needs at least one circle"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bounds = obj.ctx.bounds();
    let starts: Vec<Vec<[f64; 2]>> = (0..cfg.n_starts)
        .map(|_| random_centers(&mut rng, &bounds, n))
        .collect();
    let all = starts
        .par_iter()
        .map(|x0| local_optimize(obj, x0, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut best_index = 0;
    for (k, r) in all.iter().enumerate() {
        if r.cost < all[best_index].cost {
            best_index = k;
        }
    }
    Ok(MultistartResult {
        best_index,
        best: all[best_index].clone(),
        all,
    })
}
