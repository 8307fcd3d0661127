//! Observation ingest, the empirical distribution function, and the scenario
//! truths used for synthetic data.
//!
//! Every random draw in the crate goes through a [`Stream`]: ChaCha8 seeded
//! from a 64-bit integer. `rand_chacha` documents ChaCha output as portable
//! and value-stable, so a fixed `(seed, stream id)` pair yields the same
//! observations on every platform and release of this crate.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grenander::StepDensity;

/// Seeded random source.
pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `id` under `seed`. Used to give every Monte Carlo
/// replication its own stream so results do not depend on scheduling.
pub fn substream(seed: u64, id: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Sorted nonnegative observations. Ties are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    fn from_unsorted(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Sample { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("samples are nonempty")
    }

    pub fn ecdf(&self) -> Vec<(f64, f64)> {
        ecdf(self)
    }
}

/// Validate and sort raw observations.
pub fn ingest(raw: &[f64]) -> Result<Sample> {
    if raw.is_empty() {
        return Err(Error::EmptySample);
    }
    for (index, &value) in raw.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteObservation { index });
        }
        if value < 0.0 {
            return Err(Error::NegativeObservation { index, value });
        }
    }
    Ok(Sample::from_unsorted(raw.to_vec()))
}

/// Parse one observation per line. Blank lines and lines starting with `#`
/// are skipped.
pub fn parse_sample(text: &str, source: &str) -> Result<Sample> {
    let mut raw = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: f64 = line.parse().map_err(|_| Error::Parse {
            path: source.to_string(),
            line: lineno + 1,
            message: format!("`{line}` is not a decimal number"),
        })?;
        raw.push(value);
    }
    ingest(&raw)
}

pub fn read_sample(path: &Path) -> Result<Sample> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sample(&text, &path.display().to_string())
}

/// Points `(X₍ᵢ₎, i/n)` of the empirical CDF preceded by the origin. Tied
/// observations collapse to one point carrying the cumulated height; zeros
/// collapse onto the origin.
pub fn ecdf(s: &Sample) -> Vec<(f64, f64)> {
    let n = s.len() as f64;
    let mut points = vec![(0.0, 0.0)];
    for (i, &x) in s.values.iter().enumerate() {
        let height = (i + 1) as f64 / n;
        match points.last_mut() {
            Some(last) if last.0 == x => last.1 = height,
            _ => points.push((x, height)),
        }
    }
    points
}

/// Break point of the two-slope truth: `1 − 1/√2`.
pub fn two_slope_kink() -> f64 {
    1.0 - 1.0 / SQRT_2
}

/// A data-generating truth with nonincreasing density.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Exponential {
        rate: f64,
    },
    Uniform {
        upper: f64,
    },
    /// Density `levels[i]` on `(breakpoints[i-1], breakpoints[i]]`.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        levels: Vec<f64>,
    },
    /// Concave CDF with slope `1/(√2−1)` on `[0, 1−1/√2]` and `√2−1` on
    /// `[1−1/√2, 1]`.
    TwoSlope,
}

pub const SCENARIO_NAMES: &str = "exponential, uniform, piecewise_constant, two_slope";

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Exponential { .. } => "exponential",
            Scenario::Uniform { .. } => "uniform",
            Scenario::PiecewiseConstant { .. } => "piecewise_constant",
            Scenario::TwoSlope => "two_slope",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Scenario::Exponential { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(Error::InvalidScenario(format!(
                        "exponential rate must be positive, got {rate}"
                    )));
                }
            }
            Scenario::Uniform { upper } => {
                if !(upper.is_finite() && *upper > 0.0) {
                    return Err(Error::InvalidScenario(format!(
                        "uniform upper endpoint must be positive, got {upper}"
                    )));
                }
            }
            Scenario::PiecewiseConstant {
                breakpoints,
                levels,
            } => validate_piecewise(breakpoints, levels)?,
            Scenario::TwoSlope => {}
        }
        Ok(())
    }

    /// Jump points and levels for the piecewise-constant truths.
    pub fn pieces(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            Scenario::Exponential { .. } => None,
            Scenario::Uniform { upper } => Some((vec![*upper], vec![1.0 / upper])),
            Scenario::PiecewiseConstant {
                breakpoints,
                levels,
            } => Some((breakpoints.clone(), levels.clone())),
            Scenario::TwoSlope => {
                let c = two_slope_kink();
                Some((vec![c, 1.0], vec![SQRT_2 + 1.0, SQRT_2 - 1.0]))
            }
        }
    }

    /// The true density as a [`StepDensity`], when it is piecewise constant.
    pub fn step_density(&self) -> Option<StepDensity> {
        let (b, l) = self.pieces()?;
        Some(StepDensity::new(b, l).expect("built-in truths are valid step densities"))
    }

    pub fn is_strictly_concave(&self) -> bool {
        matches!(self, Scenario::Exponential { .. })
    }

    /// Right end of the support, `None` when unbounded.
    pub fn support_end(&self) -> Option<f64> {
        self.pieces().map(|(b, _)| *b.last().expect("nonempty"))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            Scenario::Exponential { rate } => -(-rate * x).exp_m1(),
            _ => {
                let (b, l) = self.pieces().expect("piecewise truth");
                if x >= *b.last().expect("nonempty") {
                    return 1.0;
                }
                let mut acc = 0.0;
                let mut left = 0.0;
                for (&t, &v) in b.iter().zip(&l) {
                    if x <= t {
                        return acc + v * (x - left);
                    }
                    acc += v * (t - left);
                    left = t;
                }
                1.0
            }
        }
    }

    /// Density with the left-continuous convention: `f(0) = f(0+)`.
    pub fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self {
            Scenario::Exponential { rate } => rate * (-rate * x).exp(),
            _ => {
                let (b, l) = self.pieces().expect("piecewise truth");
                let i = b.partition_point(|&t| t < x);
                l.get(i).copied().unwrap_or(0.0)
            }
        }
    }

    /// Inverse CDF on `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Scenario::Exponential { rate } => -(-u).ln_1p() / rate,
            _ => {
                let (b, l) = self.pieces().expect("piecewise truth");
                let mut acc = 0.0;
                let mut left = 0.0;
                for (&t, &v) in b.iter().zip(&l) {
                    let mass = v * (t - left);
                    if u < acc + mass {
                        return (left + (u - acc) / v).min(t);
                    }
                    acc += mass;
                    left = t;
                }
                left
            }
        }
    }

    /// End of the interval the limit-law simulator works on: the support end,
    /// or `F⁻¹(1 − 10⁻⁶)` for unbounded support.
    pub fn truncation_point(&self) -> f64 {
        match self.support_end() {
            Some(t) => t,
            None => self.quantile(1.0 - 1e-6),
        }
    }
}

fn validate_piecewise(breakpoints: &[f64], levels: &[f64]) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidScenario(msg));
    if breakpoints.is_empty() || breakpoints.len() != levels.len() {
        return bad(format!(
            "piecewise_constant needs equally many jump points and levels ({} vs {})",
            breakpoints.len(),
            levels.len()
        ));
    }
    let mut left = 0.0;
    for &t in breakpoints {
        if !(t.is_finite() && t > left) {
            return bad("jump points must be positive and strictly increasing".into());
        }
        left = t;
    }
    if levels.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return bad("levels must be positive".into());
    }
    if levels.windows(2).any(|w| w[1] >= w[0]) {
        return bad("levels must be strictly decreasing".into());
    }
    let mut left = 0.0;
    let mass: f64 = breakpoints
        .iter()
        .zip(levels)
        .map(|(&t, &v)| {
            let m = v * (t - left);
            left = t;
            m
        })
        .sum();
    if (mass - 1.0).abs() > 1e-12 {
        return bad(format!("total mass is {mass}, expected 1"));
    }
    Ok(())
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A scenario together with its seed. JSON form: `{"kind", "params", "seed"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenarioSpec", into = "RawScenarioSpec")]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawScenarioSpec {
    kind: String,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    params: serde_json::Value,
    #[serde(default)]
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RateParams {
    rate: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UpperParams {
    upper: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PieceParams {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl TryFrom<RawScenarioSpec> for ScenarioSpec {
    type Error = Error;

    fn try_from(raw: RawScenarioSpec) -> Result<Self> {
        fn params<T: serde::de::DeserializeOwned>(v: serde_json::Value, kind: &str) -> Result<T> {
            serde_json::from_value(v)
                .map_err(|e| Error::InvalidScenario(format!("bad params for `{kind}`: {e}")))
        }
        let scenario = match raw.kind.as_str() {
            "exponential" => {
                let rate = if raw.params.is_null() {
                    1.0
                } else {
                    params::<RateParams>(raw.params, "exponential")?.rate
                };
                Scenario::Exponential { rate }
            }
            "uniform" => {
                let upper = if raw.params.is_null() {
                    1.0
                } else {
                    params::<UpperParams>(raw.params, "uniform")?.upper
                };
                Scenario::Uniform { upper }
            }
            "piecewise_constant" => {
                let p: PieceParams = params(raw.params, "piecewise_constant")?;
                Scenario::PiecewiseConstant {
                    breakpoints: p.breakpoints,
                    levels: p.levels,
                }
            }
            "two_slope" | "paper_pwa" => Scenario::TwoSlope,
            other => {
                return Err(Error::UnknownScenario {
                    name: other.to_string(),
                    valid: SCENARIO_NAMES.to_string(),
                })
            }
        };
        scenario.validate()?;
        Ok(ScenarioSpec {
            scenario,
            seed: raw.seed,
        })
    }
}

impl From<ScenarioSpec> for RawScenarioSpec {
    fn from(spec: ScenarioSpec) -> Self {
        let params = match &spec.scenario {
            Scenario::Exponential { rate } => serde_json::json!({ "rate": rate }),
            Scenario::Uniform { upper } => serde_json::json!({ "upper": upper }),
            Scenario::PiecewiseConstant {
                breakpoints,
                levels,
            } => serde_json::json!({ "breakpoints": breakpoints, "levels": levels }),
            Scenario::TwoSlope => serde_json::Value::Null,
        };
        RawScenarioSpec {
            kind: spec.scenario.name().to_string(),
            params,
            seed: spec.seed,
        }
    }
}

/// `n` i.i.d. draws from the scenario by inversion.
pub fn draw<R: Rng + ?Sized>(scenario: &Scenario, n: usize, rng: &mut R) -> Result<Sample> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let values = (0..n)
        .map(|_| scenario.quantile(rng.random::<f64>()))
        .collect();
    Ok(Sample::from_unsorted(values))
}
