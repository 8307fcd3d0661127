//! Efficient-variance estimates, Wald-type confidence intervals, and the
//! standardized statistic for a uniform truth.
//!
//! Variances are estimated by plugging the fitted density into the
//! population formulas. All of them are clamped at zero against rounding.
//! The resulting intervals are valid pointwise in the truth, not uniformly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{
    empirical_mean, mu_plugin, tau_plugin, Domain, ScalarFunctional, SmoothFunctional,
};
use crate::grenander::{fit, StepDensity};
use crate::normal;
use crate::numeric::compensated_sum;
use crate::samples::Sample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub sigma_hat: f64,
    pub n: usize,
    /// Set when `sigma_hat` is zero and the interval collapses to a point.
    pub degenerate: bool,
}

impl ConfidenceInterval {
    fn build(estimate: f64, sigma2: f64, level: f64, n: usize) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::InvalidLevel(level));
        }
        let sigma_hat = sigma2.max(0.0).sqrt();
        let half = normal::critical_value(level) * sigma_hat / (n as f64).sqrt();
        let degenerate = sigma_hat == 0.0;
        if degenerate {
            log::warn!("estimated efficient variance is 0; the interval is degenerate");
        }
        Ok(ConfidenceInterval {
            estimate,
            lower: estimate - half,
            upper: estimate + half,
            level,
            sigma_hat,
            n,
            degenerate,
        })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Plug-in estimate of `Var(h'(f(X)))`, i.e. `μ(h₁, d) − μ(h₂, d)²` with
/// `h₁(z) = z h'(z)²` and `h₂(z) = z h'(z)`.
pub fn sigma_eff_mu(h: &ScalarFunctional, d: &StepDensity) -> f64 {
    let slopes: Vec<f64> = d.levels().iter().map(|&v| h.prime(v)).collect();
    if slopes.iter().all(|&s| s == slopes[0]) {
        return 0.0;
    }
    let widths: Vec<f64> = d.widths().collect();
    let terms = || d.levels().iter().zip(&slopes).zip(&widths);
    let m1 = compensated_sum(terms().map(|((&v, &s), &w)| v * s * s * w));
    let m2 = compensated_sum(terms().map(|((&v, &s), &w)| v * s * w));
    (m1 - m2 * m2).max(0.0)
}

/// Plug-in estimate of `Var(h'(f(X)) f(X) + h(f(X)))`, the efficient
/// variance for `ν(h, f)`.
pub fn sigma_eff_nu(h: &ScalarFunctional, d: &StepDensity) -> f64 {
    let k: Vec<f64> = d
        .levels()
        .iter()
        .map(|&v| h.prime(v) * v + h.value(v))
        .collect();
    if k.iter().all(|&s| s == k[0]) {
        return 0.0;
    }
    let probs: Vec<f64> = d.pieces().map(|(l, r, v)| v * (r - l)).collect();
    let m1 = compensated_sum(probs.iter().zip(&k).map(|(p, s)| p * s * s));
    let m2 = compensated_sum(probs.iter().zip(&k).map(|(p, s)| p * s));
    (m1 - m2 * m2).max(0.0)
}

/// Empirical variance of `ġ(d(Xᵢ), Xᵢ)` over the sample.
pub fn sigma_eff_tau(g: &SmoothFunctional, s: &Sample, d: &StepDensity) -> f64 {
    let m1 = empirical_mean(s, d, |z, x| {
        let t = g.dot(z, x);
        t * t
    });
    let m2 = empirical_mean(s, d, |z, x| g.dot(z, x));
    (m1 - m2 * m2).max(0.0)
}

/// `μ(h, f̂ₙ) ± z_{α/2} σ̂ / √n`.
pub fn ci_mu(h: &ScalarFunctional, s: &Sample, level: f64) -> Result<ConfidenceInterval> {
    let d = fit(s)?;
    ci_mu_fitted(h, s, &d, level)
}

pub fn ci_mu_fitted(
    h: &ScalarFunctional,
    s: &Sample,
    d: &StepDensity,
    level: f64,
) -> Result<ConfidenceInterval> {
    let estimate = mu_plugin(h, d, Domain::HalfLine)?;
    ConfidenceInterval::build(estimate, sigma_eff_mu(h, d), level, s.len())
}

/// `τ(g, f̂ₙ) ± z_{α/2} σ̂ / √n`, with the x-free case routed to [`ci_mu`].
pub fn ci_tau(g: &SmoothFunctional, s: &Sample, level: f64) -> Result<ConfidenceInterval> {
    let d = fit(s)?;
    ci_tau_fitted(g, s, &d, level)
}

pub fn ci_tau_fitted(
    g: &SmoothFunctional,
    s: &Sample,
    d: &StepDensity,
    level: f64,
) -> Result<ConfidenceInterval> {
    if let Some(h) = g.scalar() {
        return ci_mu_fitted(h, s, d, level);
    }
    let estimate = tau_plugin(g, d, Domain::HalfLine)?;
    ConfidenceInterval::build(estimate, sigma_eff_tau(g, s, d), level, s.len())
}

/// `n (μ(h, f̂ₙ) − h(1))` for a sample from Uniform[0, 1].
pub fn uniform_raw_statistic(h: &ScalarFunctional, s: &Sample) -> Result<f64> {
    let d = fit(s)?;
    let end = d.support_end().max(1.0);
    let est = mu_plugin(h, &d, Domain::Compact(end))?;
    Ok(s.len() as f64 * (est - h.value(1.0)))
}

/// `(n(μ(h, f̂ₙ) − h(1)) − ½h''(1) log n) / √(3 (½h''(1))² log n)`, which is
/// asymptotically standard normal under a Uniform[0, 1] truth.
pub fn uniform_clt_statistic(h: &ScalarFunctional, s: &Sample) -> Result<f64> {
    let half_curv = 0.5 * h.second(1.0);
    if half_curv == 0.0 {
        return Err(Error::DegenerateNormalization);
    }
    let raw = uniform_raw_statistic(h, s)?;
    Ok(standardize_uniform(raw, half_curv, s.len()))
}

pub(crate) fn standardize_uniform(raw: f64, half_curv: f64, n: usize) -> f64 {
    let log_n = (n as f64).ln();
    (raw - half_curv * log_n) / (3.0 * half_curv * half_curv * log_n).sqrt()
}
