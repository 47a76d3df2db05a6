//! Univariate profiles `y = f(x)` used by the one-dimensional analyses.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::expr::Expr;
use crate::terrain::{FD_STEP, FD_STEP_2ND};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveFn {
    /// `a·x + b`.
    Line {
        a: f64,
        b: f64,
    },
    Sine,
    /// `a·x²`.
    Parabola {
        a: f64,
    },
    /// `|m·x|`, differentiable everywhere except the origin.
    Ridge {
        slope: f64,
    },
    /// Lower half of a circle of radius `r` centered at `(0, r)`.
    Bowl {
        radius: f64,
    },
    /// Upper half of a circle of radius `r` centered at the origin.
    Arc {
        radius: f64,
    },
    Expr {
        expr: Expr,
    },
}

impl CurveFn {
    pub fn parse(source: &str) -> Result<Self> {
        Ok(CurveFn::Expr {
            expr: Expr::parse(source)?,
        })
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            CurveFn::Line { a, b } => a * x + b,
            CurveFn::Sine => x.sin(),
            CurveFn::Parabola { a } => a * x * x,
            CurveFn::Ridge { slope } => (slope * x).abs(),
            CurveFn::Bowl { radius } => radius - (radius * radius - x * x).sqrt(),
            CurveFn::Arc { radius } => (radius * radius - x * x).sqrt(),
            CurveFn::Expr { expr } => expr.eval(x, 0.0),
        }
    }

    /// First derivative. Kinks (and expressions) use a central difference,
    /// which averages the one-sided slopes.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            CurveFn::Line { a, .. } => *a,
            CurveFn::Sine => x.cos(),
            CurveFn::Parabola { a } => 2.0 * a * x,
            CurveFn::Bowl { radius } => x / (radius * radius - x * x).sqrt(),
            CurveFn::Arc { radius } => -x / (radius * radius - x * x).sqrt(),
            CurveFn::Ridge { .. } | CurveFn::Expr { .. } => {
                let h = FD_STEP * x.abs().max(1.0);
                (self.value(x + h) - self.value(x - h)) / (2.0 * h)
            }
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match self {
            CurveFn::Line { .. } => 0.0,
            CurveFn::Sine => -x.sin(),
            CurveFn::Parabola { a } => 2.0 * a,
            CurveFn::Bowl { radius } => {
                let w = (radius * radius - x * x).sqrt();
                radius * radius / (w * w * w)
            }
            CurveFn::Arc { radius } => {
                let w = (radius * radius - x * x).sqrt();
                -radius * radius / (w * w * w)
            }
            CurveFn::Ridge { .. } | CurveFn::Expr { .. } => {
                let h = FD_STEP_2ND * x.abs().max(1.0);
                (self.value(x + h) - 2.0 * self.value(x) + self.value(x - h)) / (h * h)
            }
        }
    }
}

/// Closed interval of the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid(format!(
                "domain [{lo}, {hi}] is empty or not finite"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn samples(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        (0..n).map(move |i| crate::geometry::lerp_index(self.lo, self.hi, i, n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_match_differences() {
        let curves = [
            CurveFn::Sine,
            CurveFn::Parabola { a: 1.5 },
            CurveFn::Bowl { radius: 2.0 },
            CurveFn::Arc { radius: 2.0 },
            CurveFn::Line { a: -0.5, b: 3.0 },
        ];
        for c in &curves {
            for &x in &[-1.2, -0.3, 0.0, 0.7, 1.1] {
                let h = 1e-5;
                let d1 = (c.value(x + h) - c.value(x - h)) / (2.0 * h);
                let d2 = (c.value(x + 1e-4) - 2.0 * c.value(x) + c.value(x - 1e-4)) / 1e-8;
                assert!((c.derivative(x) - d1).abs() < 1e-7, "{c:?} at {x}");
                assert!((c.second_derivative(x) - d2).abs() < 1e-4, "{c:?} at {x}");
            }
        }
    }

    #[test]
    fn ridge_kink_averages_slopes() {
        let r = CurveFn::Ridge { slope: 1.5 };
        assert_eq!(r.derivative(0.0), 0.0);
        assert!((r.derivative(0.5) - 1.5).abs() < 1e-9);
        assert!((r.derivative(-0.5) + 1.5).abs() < 1e-9);
    }
}
