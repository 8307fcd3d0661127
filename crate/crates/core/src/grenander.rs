//! The Grenander estimator: the nonparametric MLE of a nonincreasing density,
//! obtained as the left-hand slope of the least concave majorant of the
//! empirical CDF.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorant::lcm;
use crate::samples::{ecdf, Sample};

const MASS_TOLERANCE: f64 = 1e-10;

/// Nonincreasing step density: `levels[i]` on `(breakpoints[i-1],
/// breakpoints[i]]` with an implicit `breakpoints[-1] = 0`, zero beyond the
/// last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepDensity")]
pub struct StepDensity {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

#[derive(Deserialize)]
struct RawStepDensity {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl TryFrom<RawStepDensity> for StepDensity {
    type Error = Error;

    fn try_from(raw: RawStepDensity) -> Result<Self> {
        StepDensity::new(raw.breakpoints, raw.levels)
    }
}

impl StepDensity {
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidStepDensity(m));
        if breakpoints.is_empty() || breakpoints.len() != levels.len() {
            return bad(format!(
                "need equally many breakpoints and levels, got {} and {}",
                breakpoints.len(),
                levels.len()
            ));
        }
        let mut left = 0.0;
        for &t in &breakpoints {
            if !(t.is_finite() && t > left) {
                return bad("breakpoints must be positive and strictly increasing".into());
            }
            left = t;
        }
        if levels.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("levels must be positive and finite".into());
        }
        if levels.windows(2).any(|w| w[1] >= w[0]) {
            return bad("levels must be strictly decreasing".into());
        }
        let d = StepDensity {
            breakpoints,
            levels,
        };
        let mass = d.mass();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return bad(format!("total mass {mass} differs from 1"));
        }
        Ok(d)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn support_end(&self) -> f64 {
        *self.breakpoints.last().expect("nonempty")
    }

    /// `(left, right, level)` for each piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let lefts = std::iter::once(0.0).chain(self.breakpoints.iter().copied());
        lefts
            .zip(&self.breakpoints)
            .zip(&self.levels)
            .map(|((l, &r), &v)| (l, r, v))
    }

    /// Piece widths `t_i − t_{i−1}`.
    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces().map(|(l, r, _)| r - l)
    }

    pub fn mass(&self) -> f64 {
        crate::numeric::compensated_sum(self.pieces().map(|(l, r, v)| v * (r - l)))
    }

    /// Density at `x ≥ 0`; each breakpoint belongs to the piece on its left
    /// and `x = 0` takes the first level.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(Error::NegativeArgument(x));
        }
        Ok(self.level_at(x))
    }

    pub(crate) fn level_at(&self, x: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&t| t < x);
        self.levels.get(i).copied().unwrap_or(0.0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for (l, r, v) in self.pieces() {
            if x <= r {
                return acc + v * (x - l);
            }
            acc += v * (r - l);
        }
        acc
    }

    /// Two-column CSV: `breakpoint,level`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("breakpoint,level\n");
        for (t, v) in self.breakpoints.iter().zip(&self.levels) {
            writeln!(out, "{t},{v}").expect("writing to a String");
        }
        out
    }
}

const SLOPE_TIE: f64 = 8.0 * f64::EPSILON;

/// Fit the Grenander estimator.
///
/// Observations equal to zero are pooled into the first block: the hull is
/// anchored at the origin and their mass is spread over `(0, t₁]`.
pub fn fit(s: &Sample) -> Result<StepDensity> {
    if s.max() <= 0.0 {
        return Err(Error::DegenerateSupport);
    }
    let mut points = ecdf(s);
    points[0].1 = 0.0;
    let hull = lcm(&points, (0.0, s.max()))?;

    // Merge pieces whose slopes do not strictly decrease, counting slopes
    // within a few ulps as equal: collinear ECDF points rarely test exactly
    // collinear after rounding.
    let mut verts: Vec<(f64, f64)> = Vec::with_capacity(hull.len());
    for (&x, &y) in hull.knots().iter().zip(hull.values()) {
        verts.push((x, y));
        while verts.len() >= 3 {
            let k = verts.len();
            let (a, b, c) = (verts[k - 3], verts[k - 2], verts[k - 1]);
            let (left, right) = ((b.1 - a.1) / (b.0 - a.0), (c.1 - b.1) / (c.0 - b.0));
            if left <= right + SLOPE_TIE * right.abs() {
                verts.remove(k - 2);
            } else {
                break;
            }
        }
    }
    let breakpoints: Vec<f64> = verts[1..].iter().map(|p| p.0).collect();
    let levels: Vec<f64> = verts
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    StepDensity::new(breakpoints, levels)
        .map_err(|e| Error::Numeric(format!("Grenander fit produced an invalid density: {e}")))
}
