//! Capture-plan cost functions.
//!
//! Every cost is a weighted combination of four terms over the circles'
//! centers `Xᵢ` and radii `rᵢ = r(Xᵢ)`:
//!
//! | term           | definition                                  |
//! |----------------|---------------------------------------------|
//! | `deficit`      | `Σ_{i<j} [rᵢ + rⱼ − ‖Xᵢ − Xⱼ‖]₊` (apparent overlap) |
//! | `area_overlap` | `Σ_{i<j} A(rᵢ, rⱼ, ‖Xᵢ − Xⱼ‖)`               |
//! | `cov_rel`      | `Σ π (rᵢ / R)²`                             |
//! | `cov_abs`      | `Σ π rᵢ²`                                   |

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::overlap::overlap_unchecked;
use super::Circle;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CostKind {
    /// `deficit`
    F1,
    /// `deficit − cov_rel`
    F2,
    /// `5·deficit − 0.5·cov_rel`
    F3,
    /// `w1·deficit − w2·cov_rel`
    F4,
    /// `area_overlap − cov_abs`
    F5,
    /// `deficit − cov_abs`
    G1,
    /// `5·deficit − 0.5·cov_abs`
    G2,
}

impl CostKind {
    pub const ALL: [CostKind; 7] = [
        CostKind::F1,
        CostKind::F2,
        CostKind::F3,
        CostKind::F4,
        CostKind::F5,
        CostKind::G1,
        CostKind::G2,
    ];
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for CostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CostKind::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                invalid(format!(
                    "unknown cost '{s}', expected one of F1..F5, G1, G2"
                ))
            })
    }
}

/// `(w1, w2)` for the variable-weight cost as a function of the circle count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSchedule {
    Fixed {
        w1: f64,
        w2: f64,
    },
    /// `(w1, c / N)`.
    InverseN {
        w1: f64,
        c: f64,
    },
    /// Piecewise constant: the entry with the largest key `≤ N` applies.
    Table {
        steps: BTreeMap<usize, [f64; 2]>,
    },
}

impl WeightSchedule {
    /// `w1 = 5`, `w2 = 0.5 / N`.
    pub fn default_variable() -> Self {
        WeightSchedule::InverseN { w1: 5.0, c: 0.5 }
    }

    pub fn weights(&self, n: usize) -> [f64; 2] {
        match self {
            WeightSchedule::Fixed { w1, w2 } => [*w1, *w2],
            WeightSchedule::InverseN { w1, c } => [*w1, c / n.max(1) as f64],
            WeightSchedule::Table { steps } => steps
                .range(..=n)
                .next_back()
                .or_else(|| steps.iter().next())
                .map(|(_, w)| *w)
                .unwrap_or([1.0, 1.0]),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |w: f64| w >= 0.0 && w.is_finite();
        let fine = match self {
            WeightSchedule::Fixed { w1, w2 } => ok(*w1) && ok(*w2),
            WeightSchedule::InverseN { w1, c } => ok(*w1) && ok(*c),
            WeightSchedule::Table { steps } => {
                !steps.is_empty() && steps.values().all(|w| ok(w[0]) && ok(w[1]))
            }
        };
        if fine {
            Ok(())
        } else {
            Err(invalid("cost weights must be finite and non-negative"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    pub kind: CostKind,
    /// Required by `F4`, ignored otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightSchedule>,
}

impl CostSpec {
    pub fn new(kind: CostKind) -> Result<Self> {
        let spec = Self {
            kind,
            weights: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn f4(w1: f64, w2: f64) -> Result<Self> {
        Self::scheduled(WeightSchedule::Fixed { w1, w2 })
    }

    pub fn scheduled(schedule: WeightSchedule) -> Result<Self> {
        let spec = Self {
            kind: CostKind::F4,
            weights: Some(schedule),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.kind, &self.weights) {
            (CostKind::F4, None) => Err(invalid("cost F4 needs weights (w1, w2) or a schedule")),
            (_, Some(w)) => w.validate(),
            _ => Ok(()),
        }
    }

    /// Coefficients of `(deficit, area_overlap, cov_rel, cov_abs)` for a
    /// configuration of `n` circles.
    pub fn coefficients(&self, n: usize) -> Coefficients {
        let c = |deficit, area, cov_rel, cov_abs| Coefficients {
            deficit,
            area,
            cov_rel,
            cov_abs,
        };
        match self.kind {
            CostKind::F1 => c(1.0, 0.0, 0.0, 0.0),
            CostKind::F2 => c(1.0, 0.0, 1.0, 0.0),
            CostKind::F3 => c(5.0, 0.0, 0.5, 0.0),
            CostKind::F4 => {
                let [w1, w2] = self.weights.as_ref().map_or([1.0, 1.0], |w| w.weights(n));
                c(w1, 0.0, w2, 0.0)
            }
            CostKind::F5 => c(0.0, 1.0, 0.0, 1.0),
            CostKind::G1 => c(1.0, 0.0, 0.0, 1.0),
            CostKind::G2 => c(5.0, 0.0, 0.0, 0.5),
        }
    }

    /// The cost of `terms` for a configuration of `n` circles.
    pub fn combine(&self, t: &CostTerms, n: usize) -> f64 {
        match self.kind {
            CostKind::F1 => t.deficit,
            CostKind::F2 => t.deficit - t.cov_rel,
            CostKind::F3 => 5.0 * t.deficit - 0.5 * t.cov_rel,
            CostKind::F4 => {
                let k = self.coefficients(n);
                k.deficit * t.deficit - k.cov_rel * t.cov_rel
            }
            CostKind::F5 => t.area_overlap - t.cov_abs,
            CostKind::G1 => t.deficit - t.cov_abs,
            CostKind::G2 => 5.0 * t.deficit - 0.5 * t.cov_abs,
        }
    }
}

impl fmt::Display for CostSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub deficit: f64,
    pub area: f64,
    pub cov_rel: f64,
    pub cov_abs: f64,
}

impl Coefficients {
    #[inline]
    pub(crate) fn pair(&self, a: &Circle, b: &Circle) -> f64 {
        let dist = (a.x - b.x).hypot(a.y - b.y);
        let mut v = 0.0;
        if self.deficit != 0.0 {
            v += self.deficit * (a.r + b.r - dist).max(0.0);
        }
        if self.area != 0.0 {
            v += self.area * overlap_unchecked(a.r, b.r, dist);
        }
        v
    }

    #[inline]
    pub(crate) fn own(&self, c: &Circle, big_r: f64) -> f64 {
        -(self.cov_rel * PI * (c.r / big_r).powi(2) + self.cov_abs * PI * c.r * c.r)
    }
}

/// The four cost building blocks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostTerms {
    pub deficit: f64,
    pub area_overlap: f64,
    pub cov_rel: f64,
    pub cov_abs: f64,
}

/// Terms for `active` circles optimized against `frozen` ones: pairs among
/// the active circles and between active and frozen circles count, frozen
/// pairs do not, and coverage sums over the active circles only.
pub fn cost_terms(active: &[Circle], frozen: &[Circle], big_r: f64) -> CostTerms {
    let mut t = CostTerms::default();
    let mut pair = |a: &Circle, b: &Circle| {
        let dist = (a.x - b.x).hypot(a.y - b.y);
        t.deficit += (a.r + b.r - dist).max(0.0);
        t.area_overlap += overlap_unchecked(a.r, b.r, dist);
    };
    for (i, a) in active.iter().enumerate() {
        for b in &active[i + 1..] {
            pair(a, b);
        }
        for b in frozen {
            pair(a, b);
        }
    }
    for c in active {
        t.cov_rel += PI * (c.r / big_r).powi(2);
        t.cov_abs += PI * c.r * c.r;
    }
    t
}
