//! Plug-in evaluation of integrated functionals at a step density.
//!
//! Two families of integrands are supported:
//!
//! - [`ScalarFunctional`]: `h(z)`, giving `μ(h, f) = ∫ h(f(x)) dx` and
//!   `ν(h, f) = ∫ h(f(x)) f(x) dx`;
//! - [`SmoothFunctional`]: `g(z, x)`, giving `τ(g, f) = ∫ g(f(x), x) dx`.
//!
//! Derivatives are supplied by the caller and checked against central finite
//! differences when a functional is constructed, since the variance formulas
//! in [`crate::inference`] consume them directly.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grenander::StepDensity;
use crate::numeric::compensated_sum;
use crate::quadrature::{GaussLegendre, DEFAULT_ORDER, DEFAULT_REL_TOL, MAX_REFINEMENTS};
use crate::samples::{stream, Sample};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type PairFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

const CHECK_POINTS: usize = 32;
const CHECK_REL_TOL: f64 = 1e-4;
const CHECK_SEED: u64 = 0x5eed_f00d;
/// Upper end of the z-range probed by the derivative check.
pub const DEFAULT_Z_MAX: f64 = 10.0;
/// Upper end of the x-range probed for `g(z, x)`.
const X_PROBE_MAX: f64 = 10.0;

/// Integration domain for plug-in functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// `[0, ∞)`: the integrand must vanish where the density does.
    HalfLine,
    /// `[0, T]` with `T` at or beyond the end of the density's support.
    Compact(f64),
}

/// `h(z)` with its first two (optionally four) derivatives.
#[derive(Clone)]
pub struct ScalarFunctional {
    name: String,
    h: ScalarFn,
    d1: ScalarFn,
    d2: ScalarFn,
    d3: Option<ScalarFn>,
    d4: Option<ScalarFn>,
}

impl fmt::Debug for ScalarFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunctional")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl ScalarFunctional {
    /// Build from closures, checking `h'` and `h''` on `[0, DEFAULT_Z_MAX]`.
    pub fn new(
        name: impl Into<String>,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::with_z_max(name, h, d1, d2, DEFAULT_Z_MAX)
    }

    pub fn with_z_max(
        name: impl Into<String>,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        z_max: f64,
    ) -> Result<Self> {
        let f = ScalarFunctional {
            name: name.into(),
            h: Arc::new(h),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
            d3: None,
            d4: None,
        };
        f.check(z_max)?;
        Ok(f)
    }

    /// Attach third and fourth derivatives (checked like the others).
    pub fn with_higher(
        mut self,
        d3: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d4: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        self.d3 = Some(Arc::new(d3));
        self.d4 = Some(Arc::new(d4));
        self.check(DEFAULT_Z_MAX)?;
        Ok(self)
    }

    /// `h(z) = z^p`, `p > 0`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "power exponent must be positive, got {p}"
            )));
        }
        let term = move |k: i32| {
            let mut c = 1.0;
            for j in 0..k {
                c *= p - j as f64;
            }
            move |z: f64| monomial(c, p - k as f64, z)
        };
        let name = format!("power:{p}");
        ScalarFunctional::new(name, term(0), term(1), term(2))?.with_higher(term(3), term(4))
    }

    pub fn identity() -> Self {
        ScalarFunctional {
            name: "identity".into(),
            h: Arc::new(|z| z),
            d1: Arc::new(|_| 1.0),
            d2: Arc::new(|_| 0.0),
            d3: Some(Arc::new(|_| 0.0)),
            d4: Some(Arc::new(|_| 0.0)),
        }
    }

    /// `h(z) = eᶻ − 1`.
    pub fn expm1() -> Self {
        ScalarFunctional {
            name: "expm1".into(),
            h: Arc::new(f64::exp_m1),
            d1: Arc::new(f64::exp),
            d2: Arc::new(f64::exp),
            d3: Some(Arc::new(f64::exp)),
            d4: Some(Arc::new(f64::exp)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, z: f64) -> f64 {
        (self.h)(z)
    }

    pub fn prime(&self, z: f64) -> f64 {
        (self.d1)(z)
    }

    pub fn second(&self, z: f64) -> f64 {
        (self.d2)(z)
    }

    pub fn third(&self, z: f64) -> Option<f64> {
        self.d3.as_ref().map(|d| d(z))
    }

    pub fn fourth(&self, z: f64) -> Option<f64> {
        self.d4.as_ref().map(|d| d(z))
    }

    fn check(&self, z_max: f64) -> Result<()> {
        let mut rng = stream(CHECK_SEED);
        let chain: [(&'static str, &ScalarFn, Option<&ScalarFn>); 4] = [
            ("h'", &self.h, Some(&self.d1)),
            ("h''", &self.d1, Some(&self.d2)),
            ("h'''", &self.d2, self.d3.as_ref()),
            (
                "h''''",
                self.d3.as_ref().unwrap_or(&self.d2),
                self.d4.as_ref(),
            ),
        ];
        for _ in 0..CHECK_POINTS {
            let z = rng.random_range(0.01 * z_max..z_max);
            for (which, lower, upper) in &chain {
                if let Some(upper) = upper {
                    check_derivative(which, z, f64::NAN, |t| lower(t), upper(z))?;
                }
            }
        }
        Ok(())
    }
}

fn monomial(c: f64, e: f64, z: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else if e == 0.0 {
        c
    } else if e.fract() == 0.0 && e.abs() < 64.0 {
        c * z.powi(e as i32)
    } else {
        c * z.powf(e)
    }
}

fn check_derivative(
    which: &'static str,
    z: f64,
    x: f64,
    f: impl Fn(f64) -> f64,
    supplied: f64,
) -> Result<()> {
    let step = 1e-5 * z.abs().max(1.0);
    let numeric = (f(z + step) - f(z - step)) / (2.0 * step);
    let ok = (numeric - supplied).abs() <= CHECK_REL_TOL * supplied.abs().max(1.0);
    if ok {
        Ok(())
    } else {
        Err(Error::DerivativeMismatch {
            which,
            z,
            x,
            supplied,
            numeric,
        })
    }
}

/// `g(z, x)` with `∂g/∂z` and `∂²g/∂z²`.
#[derive(Clone)]
pub struct SmoothFunctional {
    name: String,
    g: PairFn,
    gdot: PairFn,
    gddot: PairFn,
    vanishes_at_zero: bool,
    scalar: Option<ScalarFunctional>,
}

impl fmt::Debug for SmoothFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFunctional")
            .field("name", &self.name)
            .field("vanishes_at_zero", &self.vanishes_at_zero)
            .field("x_free", &self.scalar.is_some())
            .finish_non_exhaustive()
    }
}

impl SmoothFunctional {
    /// Build from closures. `vanishes_at_zero` declares `g(0, x) = 0` for all
    /// `x`, which is what permits integrating over `[0, ∞)`; the declaration
    /// is spot-checked together with the derivatives.
    pub fn new(
        name: impl Into<String>,
        g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        gdot: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        gddot: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        vanishes_at_zero: bool,
    ) -> Result<Self> {
        let f = SmoothFunctional {
            name: name.into(),
            g: Arc::new(g),
            gdot: Arc::new(gdot),
            gddot: Arc::new(gddot),
            vanishes_at_zero,
            scalar: None,
        };
        f.check()?;
        Ok(f)
    }

    /// `g(z, x) = h(z)`.
    pub fn from_scalar(h: ScalarFunctional) -> Self {
        let (a, b, c) = (h.h.clone(), h.d1.clone(), h.d2.clone());
        SmoothFunctional {
            name: h.name.clone(),
            g: Arc::new(move |z, _| a(z)),
            gdot: Arc::new(move |z, _| b(z)),
            gddot: Arc::new(move |z, _| c(z)),
            vanishes_at_zero: h.value(0.0) == 0.0,
            scalar: Some(h),
        }
    }

    /// `g(z, x) = x·z²`.
    pub fn x_weighted_square() -> Self {
        SmoothFunctional {
            name: "xz2".into(),
            g: Arc::new(|z, x| x * z * z),
            gdot: Arc::new(|z, x| 2.0 * x * z),
            gddot: Arc::new(|_, x| 2.0 * x),
            vanishes_at_zero: true,
            scalar: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, z: f64, x: f64) -> f64 {
        (self.g)(z, x)
    }

    pub fn dot(&self, z: f64, x: f64) -> f64 {
        (self.gdot)(z, x)
    }

    pub fn ddot(&self, z: f64, x: f64) -> f64 {
        (self.gddot)(z, x)
    }

    pub fn vanishes_at_zero(&self) -> bool {
        self.vanishes_at_zero
    }

    /// The underlying `h` when `g` does not depend on `x`.
    pub fn scalar(&self) -> Option<&ScalarFunctional> {
        self.scalar.as_ref()
    }

    fn check(&self) -> Result<()> {
        let mut rng = stream(CHECK_SEED);
        for _ in 0..CHECK_POINTS {
            let z = rng.random_range(0.01 * DEFAULT_Z_MAX..DEFAULT_Z_MAX);
            let x = rng.random_range(0.0..X_PROBE_MAX);
            check_derivative("g_dot", z, x, |t| (self.g)(t, x), (self.gdot)(z, x))?;
            check_derivative("g_ddot", z, x, |t| (self.gdot)(t, x), (self.gddot)(z, x))?;
            if self.vanishes_at_zero && (self.g)(0.0, x) != 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "`{}` is declared to vanish at z = 0 but g(0, {x}) = {}",
                    self.name,
                    (self.g)(0.0, x)
                )));
            }
        }
        Ok(())
    }
}

fn tail_end(d: &StepDensity, domain: Domain) -> Result<Option<f64>> {
    match domain {
        Domain::HalfLine => Ok(None),
        Domain::Compact(end) => {
            let support = d.support_end();
            if end.is_nan() || end < support {
                return Err(Error::DomainTooShort { end, support });
            }
            Ok(Some(end))
        }
    }
}

/// `μ(h, d) = ∫ h(d(x)) dx`, an exact finite sum.
pub fn mu_plugin(h: &ScalarFunctional, d: &StepDensity, domain: Domain) -> Result<f64> {
    let body = d.pieces().map(|(l, r, v)| h.value(v) * (r - l));
    let h0 = h.value(0.0);
    let tail = match tail_end(d, domain)? {
        Some(end) => h0 * (end - d.support_end()),
        None if h0 == 0.0 => 0.0,
        None => return Err(Error::DivergentTail),
    };
    Ok(compensated_sum(body.chain(std::iter::once(tail))))
}

/// `τ(g, d) = ∫ g(d(x), x) dx` by refined Gauss–Legendre quadrature on each
/// piece. Falls back to [`mu_plugin`] when `g` does not depend on `x`.
pub fn tau_plugin(g: &SmoothFunctional, d: &StepDensity, domain: Domain) -> Result<f64> {
    tau_plugin_with_order(g, d, domain, DEFAULT_ORDER)
}

pub fn tau_plugin_with_order(
    g: &SmoothFunctional,
    d: &StepDensity,
    domain: Domain,
    order: usize,
) -> Result<f64> {
    if let Some(h) = g.scalar() {
        return mu_plugin(h, d, domain);
    }
    let end = tail_end(d, domain)?;
    if end.is_none() && !g.vanishes_at_zero() {
        return Err(Error::DivergentTail);
    }
    let q = GaussLegendre::new(order);
    let integrate = |v: f64, l: f64, r: f64| {
        let (val, converged) = q.refine(|x| g.value(v, x), l, r, DEFAULT_REL_TOL, MAX_REFINEMENTS);
        if !converged {
            log::warn!(
                "quadrature for `{}` on ({l}, {r}] stopped after {MAX_REFINEMENTS} refinements",
                g.name()
            );
        }
        val
    };
    let mut terms: Vec<f64> = d.pieces().map(|(l, r, v)| integrate(v, l, r)).collect();
    if let Some(end) = end {
        terms.push(integrate(0.0, d.support_end(), end));
    }
    Ok(compensated_sum(terms))
}

/// `ν(h, d) = ∫ h(d(x)) d(x) dx`.
pub fn nu_plugin(h: &ScalarFunctional, d: &StepDensity) -> f64 {
    compensated_sum(d.pieces().map(|(l, r, v)| h.value(v) * v * (r - l)))
}

/// `(1/n) Σ h(d(Xᵢ))`.
pub fn empirical_average(h: &ScalarFunctional, s: &Sample, d: &StepDensity) -> f64 {
    empirical_mean(s, d, |z, _| h.value(z))
}

/// `(1/n) Σ φ(d(Xᵢ), Xᵢ)`, walking the sorted sample alongside the pieces.
pub(crate) fn empirical_mean(s: &Sample, d: &StepDensity, phi: impl Fn(f64, f64) -> f64) -> f64 {
    let n = s.len() as f64;
    let mut piece = 0;
    let bps = d.breakpoints();
    let levels = d.levels();
    let terms = s.values().iter().map(|&x| {
        while piece < bps.len() && bps[piece] < x {
            piece += 1;
        }
        let z = levels.get(piece).copied().unwrap_or(0.0);
        phi(z, x)
    });
    compensated_sum(terms) / n
}

/// The bias correction of the one-step estimator built on `d`:
/// `ℙₙ[k∘d] − P_d[k∘d]` with `k(z) = h(z) + z h'(z)`.
pub fn one_step_correction(h: &ScalarFunctional, s: &Sample, d: &StepDensity) -> f64 {
    let k = |z: f64| h.value(z) + z * h.prime(z);
    let empirical = empirical_mean(s, d, |z, _| k(z));
    let model = compensated_sum(d.pieces().map(|(l, r, v)| k(v) * v * (r - l)));
    empirical - model
}
