//! Tuning-parameter-free estimation of smooth integrated functionals of a
//! nonincreasing density on `[0, ∞)`.
//!
//! The estimator is the plug-in `∫ g(f̂ₙ(x), x) dx`, where `f̂ₙ` is the
//! Grenander estimator: the left-hand slope of the least concave majorant of
//! the empirical distribution function. Around it the crate provides
//! efficient-variance inference, a sampler for the limiting law of the
//! plug-in, and a Monte Carlo replication harness.
//!
//! Module map:
//!
//! - [`samples`]: observation ingest, empirical CDF, scenario truths and
//!   seeded inverse-CDF sampling.
//! - [`majorant`]: least concave majorants of finite point sets.
//! - [`grenander`]: the Grenander fit as a [`grenander::StepDensity`].
//! - [`functionals`]: plug-in evaluation of `τ`, `μ`, `ν` and the empirical
//!   average `ℙₙ[h∘f̂ₙ]`.
//! - [`inference`]: efficient variances, confidence intervals, and the
//!   uniform-truth standardized statistic.
//! - [`limitlaw`]: Brownian-bridge paths, the directional derivative of the
//!   majorant operator, and draws of the limit variable.
//! - [`harness`]: replication studies, KS / Q-Q summaries and report output.

pub mod error;
pub mod functionals;
pub mod grenander;
pub mod harness;
pub mod inference;
pub mod limitlaw;
pub mod majorant;
pub mod normal;
pub mod quadrature;
pub mod samples;

mod numeric;

pub use error::{Error, Result};
pub use functionals::{Domain, ScalarFunctional, SmoothFunctional};
pub use grenander::{fit, StepDensity};
pub use majorant::{lcm, PiecewiseLinearConcave};
pub use samples::{ingest, Sample, Scenario, ScenarioSpec};
