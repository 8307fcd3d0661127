//! Population values `τ(g, f)` and `σ²_eff = Var(ġ(f(X), X))` for the
//! built-in truths, by refined Gauss–Legendre quadrature on pieces where the
//! density is smooth.

use serde::{Deserialize, Serialize};

use crate::functionals::SmoothFunctional;
use crate::numeric::compensated_sum;
use crate::quadrature::{GaussLegendre, DEFAULT_ORDER, MAX_REFINEMENTS};
use crate::samples::Scenario;

/// Unit-length pieces are used on unbounded supports up to this many mean
/// lifetimes, beyond which `e^{-x}` is below machine precision.
const EXP_SPAN: f64 = 45.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub tau: f64,
    pub sigma2_eff: f64,
}

/// `∫ φ(f(x), x) dx` over the support, with `f` held at the piece level on
/// piecewise-constant truths.
pub fn integrate_over_truth(scenario: &Scenario, phi: impl Fn(f64, f64) -> f64) -> f64 {
    let q = GaussLegendre::new(DEFAULT_ORDER);
    let tol = 1e-13;
    match scenario.pieces() {
        Some((bps, levels)) => {
            let mut left = 0.0;
            let terms: Vec<f64> = bps
                .iter()
                .zip(&levels)
                .map(|(&t, &v)| {
                    let (val, _) = q.refine(|x| phi(v, x), left, t, tol, MAX_REFINEMENTS);
                    left = t;
                    val
                })
                .collect();
            compensated_sum(terms)
        }
        None => {
            let Scenario::Exponential { rate } = scenario else {
                unreachable!("only the exponential truth has unbounded support")
            };
            let unit = 1.0 / rate;
            let terms: Vec<f64> = (0..EXP_SPAN as usize)
                .map(|k| {
                    let (a, b) = (k as f64 * unit, (k + 1) as f64 * unit);
                    q.refine(|x| phi(scenario.density(x), x), a, b, tol, MAX_REFINEMENTS)
                        .0
                })
                .collect();
            compensated_sum(terms)
        }
    }
}

pub fn truth_for(scenario: &Scenario, g: &SmoothFunctional) -> Truth {
    let tau = integrate_over_truth(scenario, |z, x| g.value(z, x));
    let m1 = integrate_over_truth(scenario, |z, x| z * g.dot(z, x));
    let m2 = integrate_over_truth(scenario, |z, x| z * g.dot(z, x).powi(2));
    Truth {
        tau,
        sigma2_eff: (m2 - m1 * m1).max(0.0),
    }
}
