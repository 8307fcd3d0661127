//! Kolmogorov–Smirnov distances and Q-Q quantile pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;

/// Reference law for a sampling distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reference {
    /// `N(mean, variance)`; `variance = 0` is a point mass.
    Normal { mean: f64, variance: f64 },
    /// Empirical law of a reference sample (kept sorted).
    Empirical { values: Vec<f64> },
}

impl Reference {
    pub fn normal(mean: f64, variance: f64) -> Self {
        Reference::Normal { mean, variance }
    }

    pub fn empirical(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Reference::Empirical { values }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Reference::Normal { mean, .. } => *mean,
            Reference::Empirical { values } => values.iter().sum::<f64>() / values.len() as f64,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Reference::Normal { variance, .. } => *variance,
            Reference::Empirical { values } => sample_variance(values),
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match self {
            Reference::Normal { mean, variance } => {
                if *variance == 0.0 {
                    *mean
                } else {
                    mean + variance.sqrt() * normal::quantile(p)
                }
            }
            Reference::Empirical { values } => sorted_quantile(values, p),
        }
    }
}

/// Unbiased sample variance.
pub fn sample_variance(values: &[f64]) -> f64 {
    let m = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / m;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
}

/// Linear-interpolation quantile of sorted data (Hyndman–Fan type 7).
pub fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let m = sorted.len();
    if m == 1 {
        return sorted[0];
    }
    let h = (m - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(m - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Supremum distance between the empirical CDF of `sample` and `reference`.
/// Two-sample statistic when the reference is empirical.
pub fn ks_distance(sample: &[f64], reference: &Reference) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let d = match reference {
        Reference::Normal { mean, variance } => one_sample(&xs, |x| {
            if *variance == 0.0 {
                (
                    if x >= *mean { 1.0 } else { 0.0 },
                    if x > *mean { 1.0 } else { 0.0 },
                )
            } else {
                let c = normal::cdf((x - mean) / variance.sqrt());
                (c, c)
            }
        }),
        Reference::Empirical { values } => {
            if values.is_empty() {
                return Err(Error::EmptySample);
            }
            two_sample(&xs, values)
        }
    };
    Ok(d.clamp(0.0, 1.0))
}

/// `cdf` returns `(F(x), F(x−))`.
fn one_sample(xs: &[f64], cdf: impl Fn(f64) -> (f64, f64)) -> f64 {
    let m = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let (at, before) = cdf(x);
        d = d.max((j as f64 / m - at).abs());
        d = d.max((before - i as f64 / m).abs());
        i = j;
    }
    d
}

fn two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / ma - j as f64 / mb).abs());
    }
    d
}

/// Quantile pairs `(sample, reference)` at `p = 1/100, …, 99/100`.
pub fn qq_pairs(sample: &[f64], reference: &Reference) -> Vec<(f64, f64)> {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    (1..=99)
        .map(|k| {
            let p = k as f64 / 100.0;
            (sorted_quantile(&xs, p), reference.quantile(p))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_have_zero_distance() {
        let xs = vec![0.3, -1.0, 2.0, 2.0, 0.1];
        assert_eq!(
            ks_distance(&xs, &Reference::empirical(xs.clone())).unwrap(),
            0.0
        );
    }

    #[test]
    fn point_mass_against_normal() {
        let xs = vec![0.7; 20];
        let d = ks_distance(&xs, &Reference::normal(0.0, 1.0)).unwrap();
        assert!(d >= 0.5);
        let d = ks_distance(&xs, &Reference::normal(0.7, 0.0)).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn disjoint_samples_have_distance_one() {
        let d = ks_distance(&[1.0, 2.0], &Reference::empirical(vec![5.0, 6.0, 7.0])).unwrap();
        assert_eq!(d, 1.0);
        assert!(ks_distance(&[], &Reference::normal(0.0, 1.0)).is_err());
    }

    #[test]
    fn one_sample_small_case() {
        // Single point at the median: ECDF jumps 0 → 1 where Φ = 1/2.
        let d = ks_distance(&[0.0], &Reference::normal(0.0, 1.0)).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn qq_pairs_are_monotone() {
        let xs: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let pairs = qq_pairs(&xs, &Reference::normal(1.0, 4.0));
        assert_eq!(pairs.len(), 99);
        assert!(pairs
            .windows(2)
            .all(|w| w[0].0 <= w[1].0 && w[0].1 < w[1].1));
        assert!((pairs[49].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn type7_quantiles() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(sorted_quantile(&xs, 0.0), 1.0);
        assert_eq!(sorted_quantile(&xs, 1.0), 4.0);
        assert_eq!(sorted_quantile(&xs, 0.5), 2.5);
    }
}
