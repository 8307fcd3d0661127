//! Monte Carlo replication studies.
//!
//! Replication `r` at the `k`-th sample size draws from its own ChaCha
//! stream (`seed`, stream id `k·2⁴⁰ + r`), and results are stored by
//! replication index, so a study is reproducible bit for bit whatever the
//! number of worker threads.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{tau_plugin, Domain, SmoothFunctional};
use crate::grenander::fit;
use crate::harness::ks::{ks_distance, qq_pairs, sample_variance, Reference};
use crate::harness::named::{parse_functional, parse_scalar};
use crate::harness::output::{read_limit_sample, LimitSampleMetadata};
use crate::harness::truth::truth_for;
use crate::inference::{
    ci_tau_fitted, standardize_uniform, uniform_raw_statistic, ConfidenceInterval,
};
use crate::limitlaw::{LimitSampler, TrueModel};
use crate::samples::{draw, substream, Scenario, ScenarioSpec};

pub const DEFAULT_LIMIT_DRAWS: usize = 10_000;
pub const DEFAULT_GRID_SIZE: usize = 2000;
const LIMIT_STREAM_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
pub const CI_VALIDITY: &str = "pointwise: valid for each fixed true density, not uniformly";

fn default_ci_level() -> f64 {
    0.95
}

/// Reference law the standardized statistics are compared against.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceConfig {
    /// Normal when the limit is known to be normal (strictly concave truth
    /// or x-free functional), otherwise a simulated limit sample.
    #[default]
    Auto,
    Normal,
    LimitSample {
        /// Read draws from a file written by `limit-sample`.
        #[serde(default)]
        path: Option<PathBuf>,
        /// Otherwise simulate this many draws.
        #[serde(default)]
        draws: Option<usize>,
        #[serde(default)]
        grid_size: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub scenario: ScenarioSpec,
    pub functional: String,
    pub n: Vec<usize>,
    pub replications: usize,
    /// Overrides the scenario seed.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
}

impl StudyConfig {
    pub fn effective_seed(&self) -> u64 {
        self.seed.unwrap_or(self.scenario.seed)
    }

    fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(Error::InvalidConfig(
                "`n` must list positive sample sizes".into(),
            ));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig(
                "`replications` must be positive".into(),
            ));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidLevel(self.ci_level));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformStudyConfig {
    pub h: String,
    pub n: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSummary {
    /// `normal` or `limit_sample`.
    pub kind: String,
    pub mean: f64,
    pub variance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub variance: f64,
    /// Monte Carlo standard error of `mean`.
    pub mean_se: f64,
    /// `|mean| > 5 · mean_se`: a finite-sample bias is visible at this n.
    pub bias_flagged: bool,
    /// KS distance to the report's reference.
    pub ks: f64,
    /// KS distance to `N(0, σ²_eff)`, when that differs from the reference.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_vs_efficient_normal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_coverage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformDetails {
    /// `½ h''(1)`.
    pub half_curvature: f64,
    /// `½ h''(1) log n`.
    pub centering: f64,
    /// `√(3 (½ h''(1))² log n)`.
    pub scale: f64,
    /// Mean of the unstandardized `n (μ(h, f̂ₙ) − h(1))`.
    pub raw_mean: f64,
    pub raw_statistics: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub scenario: ScenarioSpec,
    pub functional: String,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    pub truth: f64,
    pub sigma2_eff: f64,
    pub reference: ReferenceSummary,
    pub summary: Summary,
    /// `(sample quantile, reference quantile)` at `p = 0.01, …, 0.99`.
    pub qq: Vec<(f64, f64)>,
    /// `√n (τ̂ − τ)` per replication, standardized with the known truth.
    pub statistics: Vec<f64>,
    /// `(τ̂ − τ) / (σ̂ / √n)` per replication, with the estimated σ̂.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub studentized: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub uniform: Option<UniformDetails>,
    pub ci_validity: String,
    pub wall_time_secs: f64,
}

impl SimulationReport {
    /// File stem shared by this report's output files.
    pub fn stem(&self) -> String {
        let f: String = self
            .functional
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '.' {
                    c
                } else {
                    '-'
                }
            })
            .collect();
        format!("{}_{}_n{}", self.scenario.scenario.name(), f, self.n)
    }
}

fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::InvalidConfig(format!("cannot start thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn replication_stream(seed: u64, size_index: usize, rep: usize) -> crate::samples::Stream {
    substream(seed, ((size_index as u64) << 40) | rep as u64)
}

/// Draw from the limit law of the plug-in for `g` under `scenario`, one
/// independent stream per draw.
pub fn limit_draws(
    g: &SmoothFunctional,
    scenario: &Scenario,
    grid_size: usize,
    draws: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<(LimitSampler, Vec<f64>, f64)> {
    let sampler = LimitSampler::new(g, TrueModel::from_scenario(scenario.clone())?, grid_size)?;
    let out: Vec<(f64, f64)> = with_threads(threads, || {
        (0..draws)
            .into_par_iter()
            .map(|i| sampler.draw_detailed(&mut substream(seed ^ LIMIT_STREAM_SALT, i as u64)))
            .collect()
    })?;
    let sup = out.iter().map(|p| p.1).fold(0.0, f64::max);
    let ys = out.into_iter().map(|p| p.0).collect();
    Ok((sampler, ys, sup))
}

fn resolve_reference(
    config: &StudyConfig,
    g: &SmoothFunctional,
    sigma2: f64,
    seed: u64,
    threads: Option<usize>,
) -> Result<(Reference, ReferenceSummary)> {
    let normal = || {
        (
            Reference::normal(0.0, sigma2),
            ReferenceSummary {
                kind: "normal".into(),
                mean: 0.0,
                variance: sigma2,
                draws: None,
                source: None,
            },
        )
    };
    let (path, draws, grid) = match &config.reference {
        ReferenceConfig::Normal => return Ok(normal()),
        ReferenceConfig::Auto
            if config.scenario.scenario.is_strictly_concave() || g.scalar().is_some() =>
        {
            return Ok(normal())
        }
        ReferenceConfig::Auto => (None, None, None),
        ReferenceConfig::LimitSample {
            path,
            draws,
            grid_size,
        } => (path.clone(), *draws, *grid_size),
    };
    let (values, source) = match path {
        Some(p) => (read_limit_sample(&p)?, p.display().to_string()),
        None => {
            let draws = draws.unwrap_or(DEFAULT_LIMIT_DRAWS);
            let grid = grid.unwrap_or(DEFAULT_GRID_SIZE);
            let (_, ys, _) = limit_draws(g, &config.scenario.scenario, grid, draws, seed, threads)?;
            (ys, format!("simulated, grid_size {grid}"))
        }
    };
    if values.is_empty() {
        return Err(Error::InvalidConfig("limit sample is empty".into()));
    }
    let reference = Reference::empirical(values);
    let summary = ReferenceSummary {
        kind: "limit_sample".into(),
        mean: reference.mean(),
        variance: reference.variance(),
        draws: match &reference {
            Reference::Empirical { values } => Some(values.len()),
            Reference::Normal { .. } => None,
        },
        source: Some(source),
    };
    Ok((reference, summary))
}

fn summarize(
    statistics: &[f64],
    reference: &Reference,
    efficient: Option<&Reference>,
    coverage: Option<(f64, f64)>,
) -> Result<Summary> {
    let reps = statistics.len() as f64;
    let mean = statistics.iter().sum::<f64>() / reps;
    let variance = sample_variance(statistics);
    let mean_se = (variance / reps).sqrt();
    let bias_flagged = mean.abs() > 5.0 * mean_se;
    Ok(Summary {
        mean,
        variance,
        mean_se,
        bias_flagged,
        ks: ks_distance(statistics, reference)?,
        ks_vs_efficient_normal: efficient.map(|r| ks_distance(statistics, r)).transpose()?,
        ci_coverage: coverage.map(|c| c.0),
        ci_level: coverage.map(|c| c.1),
    })
}

/// Configuration for a stand-alone limit-law sample. Extra fields are
/// ignored so a `simulate` configuration can be reused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSampleConfig {
    pub scenario: ScenarioSpec,
    pub functional: String,
    #[serde(default)]
    pub grid_size: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Draw `draws` values of the limit variable `Y` described by `config`.
pub fn run_limit_sample(
    config: &LimitSampleConfig,
    draws: usize,
    seed_override: Option<u64>,
    threads: Option<usize>,
) -> Result<(LimitSampleMetadata, Vec<f64>)> {
    if draws == 0 {
        return Err(Error::InvalidConfig("`draws` must be positive".into()));
    }
    let g = parse_functional(&config.functional)?;
    let seed = seed_override
        .or(config.seed)
        .unwrap_or(config.scenario.seed);
    let grid_size = config.grid_size.unwrap_or(DEFAULT_GRID_SIZE);
    let (sampler, ys, sup) = limit_draws(
        &g,
        &config.scenario.scenario,
        grid_size,
        draws,
        seed,
        threads,
    )?;
    let meta = LimitSampleMetadata {
        scenario: config.scenario.scenario.name().into(),
        functional: config.functional.clone(),
        grid_size,
        seed,
        draws,
        truncation: sampler.truncation_point(),
        tail_bound: sup * sampler.tail_variation(),
    };
    Ok((meta, ys))
}

/// Replicate the plug-in estimator under a known truth for every sample
/// size in the configuration.
pub fn run_study(config: &StudyConfig, threads: Option<usize>) -> Result<Vec<SimulationReport>> {
    config.validate()?;
    let g = parse_functional(&config.functional)?;
    let scenario = &config.scenario.scenario;
    let seed = config.effective_seed();
    let truth = truth_for(scenario, &g);
    let (reference, reference_summary) =
        resolve_reference(config, &g, truth.sigma2_eff, seed, threads)?;
    let efficient = Reference::normal(0.0, truth.sigma2_eff);
    let efficient = (reference != efficient).then_some(efficient);

    let mut reports = Vec::with_capacity(config.n.len());
    for (k, &n) in config.n.iter().enumerate() {
        let start = Instant::now();
        let rows: Vec<(f64, f64, bool)> = with_threads(threads, || {
            (0..config.replications)
                .into_par_iter()
                .map(|r| -> Result<(f64, f64, bool)> {
                    let mut rng = replication_stream(seed, k, r);
                    let s = draw(scenario, n, &mut rng)?;
                    let d = fit(&s)?;
                    let est = tau_plugin(&g, &d, Domain::HalfLine)?;
                    let ci: ConfidenceInterval = ci_tau_fitted(&g, &s, &d, config.ci_level)?;
                    let root_n = (n as f64).sqrt();
                    let studentized = if ci.sigma_hat > 0.0 {
                        (est - truth.tau) * root_n / ci.sigma_hat
                    } else {
                        f64::NAN
                    };
                    Ok((
                        root_n * (est - truth.tau),
                        studentized,
                        ci.contains(truth.tau),
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })??;
        let statistics: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let studentized: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let coverage = rows.iter().filter(|r| r.2).count() as f64 / rows.len() as f64;
        if statistics.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite standardized statistic".into()));
        }
        let summary = summarize(
            &statistics,
            &reference,
            efficient.as_ref(),
            Some((coverage, config.ci_level)),
        )?;
        if summary.bias_flagged {
            log::warn!(
                "{} / {} at n = {n}: mean {:.4} exceeds 5 standard errors ({:.4})",
                scenario,
                config.functional,
                summary.mean,
                summary.mean_se
            );
        }
        reports.push(SimulationReport {
            scenario: config.scenario.clone(),
            functional: config.functional.clone(),
            n,
            replications: config.replications,
            seed,
            truth: truth.tau,
            sigma2_eff: truth.sigma2_eff,
            reference: reference_summary.clone(),
            qq: qq_pairs(&statistics, &reference),
            summary,
            statistics,
            studentized,
            uniform: None,
            ci_validity: CI_VALIDITY.into(),
            wall_time_secs: start.elapsed().as_secs_f64(),
        });
    }
    Ok(reports)
}

/// Replicate the standardized plug-in under a Uniform[0, 1] truth.
pub fn run_uniform_study(
    config: &UniformStudyConfig,
    threads: Option<usize>,
) -> Result<Vec<SimulationReport>> {
    let h = parse_scalar(&config.h)?;
    let half_curv = 0.5 * h.second(1.0);
    if half_curv == 0.0 {
        return Err(Error::DegenerateNormalization);
    }
    if config.n.iter().any(|&n| n < 2) || config.n.is_empty() || config.replications == 0 {
        return Err(Error::InvalidConfig(
            "uniform study needs n ≥ 2 and at least one replication".into(),
        ));
    }
    let scenario = Scenario::Uniform { upper: 1.0 };
    let reference = Reference::normal(0.0, 1.0);
    let mut reports = Vec::with_capacity(config.n.len());
    for (k, &n) in config.n.iter().enumerate() {
        let start = Instant::now();
        let raw: Vec<f64> = with_threads(threads, || {
            (0..config.replications)
                .into_par_iter()
                .map(|r| {
                    let mut rng = replication_stream(config.seed, k, r);
                    let s = draw(&scenario, n, &mut rng)?;
                    uniform_raw_statistic(&h, &s)
                })
                .collect::<Result<Vec<_>>>()
        })??;
        let statistics: Vec<f64> = raw
            .iter()
            .map(|&v| standardize_uniform(v, half_curv, n))
            .collect();
        let log_n = (n as f64).ln();
        let summary = summarize(&statistics, &reference, None, None)?;
        reports.push(SimulationReport {
            scenario: ScenarioSpec {
                scenario: scenario.clone(),
                seed: config.seed,
            },
            functional: config.h.clone(),
            n,
            replications: config.replications,
            seed: config.seed,
            truth: h.value(1.0),
            sigma2_eff: 0.0,
            reference: ReferenceSummary {
                kind: "normal".into(),
                mean: 0.0,
                variance: 1.0,
                draws: None,
                source: None,
            },
            qq: qq_pairs(&statistics, &reference),
            summary,
            statistics,
            studentized: Vec::new(),
            uniform: Some(UniformDetails {
                half_curvature: half_curv,
                centering: half_curv * log_n,
                scale: (3.0 * half_curv * half_curv * log_n).sqrt(),
                raw_mean: raw.iter().sum::<f64>() / raw.len() as f64,
                raw_statistics: raw,
            }),
            ci_validity: CI_VALIDITY.into(),
            wall_time_secs: start.elapsed().as_secs_f64(),
        });
    }
    Ok(reports)
}
