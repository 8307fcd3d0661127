//! Simulation of the limit law of `√n (τ(g, f̂ₙ) − τ(g, f))`.
//!
//! The limit is `Y = −∫ Ĝ(x) d[ġ(f(x), x)]`, where `𝔾 = 𝔹∘F` is a Brownian
//! bridge run through the true CDF and `Ĝ` is the directional derivative of
//! the least-concave-majorant operator at `F` applied to `𝔾`. For a strictly
//! concave `F` the derivative is the identity; for a piecewise-affine `F` it
//! takes the concave majorant of `𝔾` separately on every affine interval.
//!
//! Paths live on the union of a uniform x-grid over `[0, T]` and the affine
//! interval endpoints. `T` is the support end, or `F⁻¹(1 − 10⁻⁶)` when the
//! support is unbounded; the neglected tail is bounded by
//! `sup|Ĝ| · TV(ψ; [T, ∞))` and reported through [`LimitSampler::tail_variation`].

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::functionals::SmoothFunctional;
use crate::majorant::restricted_lcm_in_place;
use crate::samples::Scenario;

/// A process realisation on a finite grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl GridPath {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "need at least two grid points and one value per point ({} vs {})",
                grid.len(),
                values.len()
            )));
        }
        if grid.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite entry".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "grid must be strictly increasing".into(),
            ));
        }
        Ok(GridPath { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub(crate) fn values_mut_with_grid(&mut self) -> (&[f64], &mut [f64]) {
        (&self.grid, &mut self.values)
    }
}

/// Shape of the true CDF as seen by the majorant derivative.
#[derive(Debug, Clone, PartialEq)]
pub enum Concavity {
    StrictlyConcave,
    /// Affine on each `[knots[i-1], knots[i]]`; `knots[0] = 0` and the last
    /// knot is the support end.
    PiecewiseAffine {
        knots: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrueModel {
    scenario: Scenario,
    concavity: Concavity,
}

impl TrueModel {
    pub fn from_scenario(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let concavity = match scenario.pieces() {
            None => Concavity::StrictlyConcave,
            Some((bps, _)) => {
                let mut knots = Vec::with_capacity(bps.len() + 1);
                knots.push(0.0);
                knots.extend(bps);
                Concavity::PiecewiseAffine { knots }
            }
        };
        Ok(TrueModel {
            scenario,
            concavity,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn concavity(&self) -> &Concavity {
        &self.concavity
    }

    pub fn truncation_point(&self) -> f64 {
        self.scenario.truncation_point()
    }
}

/// Brownian bridge on `grid`, which must run from exactly 0 to exactly 1.
pub fn bridge_path<R: Rng + ?Sized>(grid: &[f64], rng: &mut R) -> Result<GridPath> {
    if grid.first() != Some(&0.0) || grid.last() != Some(&1.0) {
        return Err(Error::InvalidGrid(
            "bridge grid must start at 0 and end at 1".into(),
        ));
    }
    let mut values = vec![0.0; grid.len()];
    let path = GridPath::new(grid.to_vec(), values.clone())?;
    fill_bridge(grid, rng, &mut values);
    Ok(GridPath { values, ..path })
}

fn fill_bridge<R: Rng + ?Sized>(grid: &[f64], rng: &mut R, out: &mut [f64]) {
    out[0] = 0.0;
    let mut w = 0.0;
    for j in 1..grid.len() {
        let z: f64 = rng.sample(StandardNormal);
        w += (grid[j] - grid[j - 1]).sqrt() * z;
        out[j] = w;
    }
    let w1 = w;
    for (v, &u) in out.iter_mut().zip(grid) {
        *v -= u * w1;
    }
}

/// `M'_F 𝔾`: identity for a strictly concave truth, interval-wise least
/// concave majorants for a piecewise-affine one.
pub fn hadamard_lcm_derivative(model: &TrueModel, g_path: &GridPath) -> Result<GridPath> {
    let mut out = g_path.clone();
    if let Concavity::PiecewiseAffine { knots } = &model.concavity {
        let (grid, values) = out.values_mut_with_grid();
        for w in knots.windows(2) {
            restricted_lcm_in_place((grid, values), w[0], w[1]).map_err(|e| match e {
                Error::OffGrid { value } => Error::InvalidGrid(format!(
                    "affine-interval endpoint {value} is not a grid point"
                )),
                other => other,
            })?;
        }
    }
    Ok(out)
}

/// Repeated draws of `Y` for one functional and truth.
#[derive(Debug, Clone)]
pub struct LimitSampler {
    model: TrueModel,
    x_grid: Vec<f64>,
    u_grid: Vec<f64>,
    /// `Y = −Σ Ĝ(x_j) weights[j]`: left-endpoint increments of ψ plus the
    /// jumps of ψ at the density's breakpoints.
    weights: Vec<f64>,
    /// Index ranges of the affine intervals in `x_grid`.
    intervals: Vec<(usize, usize)>,
    tail_variation: f64,
}

impl LimitSampler {
    pub fn new(g: &SmoothFunctional, model: TrueModel, grid_size: usize) -> Result<Self> {
        if grid_size < 1 {
            return Err(Error::InvalidConfig("grid_size must be at least 1".into()));
        }
        let t_end = model.truncation_point();
        let knots: &[f64] = match &model.concavity {
            Concavity::StrictlyConcave => &[],
            Concavity::PiecewiseAffine { knots } => knots,
        };
        let x_grid = union_grid(t_end, grid_size, knots);
        let m = x_grid.len();

        let mut u_grid: Vec<f64> = x_grid.iter().map(|&x| model.scenario.cdf(x)).collect();
        u_grid[0] = 0.0;
        if knots.is_empty() {
            u_grid.push(1.0);
        } else {
            u_grid[m - 1] = 1.0;
        }
        if u_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "true CDF is not strictly increasing on the grid; lower grid_size".into(),
            ));
        }

        let mut weights = vec![0.0; m];
        let intervals: Vec<(usize, usize)>;
        let tail_variation;
        match &model.concavity {
            Concavity::StrictlyConcave => {
                let psi: Vec<f64> = x_grid
                    .iter()
                    .map(|&x| g.dot(model.scenario.density(x), x))
                    .collect();
                for j in 0..m - 1 {
                    weights[j] = psi[j + 1] - psi[j];
                }
                intervals = Vec::new();
                tail_variation = tail_total_variation(g, &model.scenario, t_end);
            }
            Concavity::PiecewiseAffine { knots } => {
                let (_, levels) = model.scenario.pieces().expect("piecewise truth");
                let idx: Vec<usize> = knots
                    .iter()
                    .map(|&t| {
                        x_grid
                            .binary_search_by(|x| x.total_cmp(&t))
                            .expect("knots on grid")
                    })
                    .collect();
                for (i, w) in idx.windows(2).enumerate() {
                    let v = levels[i];
                    for j in w[0]..w[1] {
                        weights[j] += g.dot(v, x_grid[j + 1]) - g.dot(v, x_grid[j]);
                    }
                    let t = x_grid[w[1]];
                    let next = levels.get(i + 1).copied().unwrap_or(0.0);
                    weights[w[1]] += g.dot(next, t) - g.dot(v, t);
                }
                intervals = idx.windows(2).map(|w| (w[0], w[1])).collect();
                tail_variation = 0.0;
            }
        }
        Ok(LimitSampler {
            model,
            x_grid,
            u_grid,
            weights,
            intervals,
            tail_variation,
        })
    }

    pub fn model(&self) -> &TrueModel {
        &self.model
    }

    pub fn x_grid(&self) -> &[f64] {
        &self.x_grid
    }

    pub fn truncation_point(&self) -> f64 {
        *self.x_grid.last().expect("nonempty grid")
    }

    /// Total variation of `ψ(x) = ġ(f(x), x)` beyond the truncation point.
    pub fn tail_variation(&self) -> f64 {
        self.tail_variation
    }

    /// `𝔾 = 𝔹∘F` on the x-grid.
    pub fn g_path<R: Rng + ?Sized>(&self, rng: &mut R) -> GridPath {
        let mut buf = vec![0.0; self.u_grid.len()];
        fill_bridge(&self.u_grid, rng, &mut buf);
        buf.truncate(self.x_grid.len());
        GridPath {
            grid: self.x_grid.clone(),
            values: buf,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.draw_detailed(rng).0
    }

    /// One draw of `Y` together with `sup|Ĝ|` over the grid.
    pub fn draw_detailed<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let mut buf = vec![0.0; self.u_grid.len()];
        fill_bridge(&self.u_grid, rng, &mut buf);
        let m = self.x_grid.len();
        for &(a, b) in &self.intervals {
            restricted_lcm_in_place(
                (&self.x_grid, &mut buf[..m]),
                self.x_grid[a],
                self.x_grid[b],
            )
            .expect("interval endpoints are grid points");
        }
        self.integrate(&buf[..m])
    }

    /// One draw of the linear functional `−∫ 𝔾 dψ`, i.e. `Y` with the
    /// majorant derivative replaced by the identity.
    pub fn draw_linear<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut buf = vec![0.0; self.u_grid.len()];
        fill_bridge(&self.u_grid, rng, &mut buf);
        self.integrate(&buf[..self.x_grid.len()]).0
    }

    fn integrate(&self, g_hat: &[f64]) -> (f64, f64) {
        let mut y = 0.0;
        let mut sup: f64 = 0.0;
        for (v, w) in g_hat.iter().zip(&self.weights) {
            y -= v * w;
            sup = sup.max(v.abs());
        }
        (y, sup)
    }
}

/// One draw of `Y`.
pub fn sample_y<R: Rng + ?Sized>(
    g: &SmoothFunctional,
    model: &TrueModel,
    grid_size: usize,
    rng: &mut R,
) -> Result<f64> {
    Ok(LimitSampler::new(g, model.clone(), grid_size)?.draw(rng))
}

fn union_grid(t_end: f64, grid_size: usize, knots: &[f64]) -> Vec<f64> {
    let tol = 1e-12 * t_end;
    let mut grid: Vec<f64> = knots.to_vec();
    for j in 0..=grid_size {
        let x = if j == grid_size {
            t_end
        } else {
            t_end * (j as f64 / grid_size as f64)
        };
        if !knots.iter().any(|&k| (k - x).abs() <= tol) {
            grid.push(x);
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn tail_total_variation(g: &SmoothFunctional, scenario: &Scenario, t_end: f64) -> f64 {
    let far = scenario.quantile(1.0 - 1e-15).max(t_end);
    let steps = 2000;
    let psi = |x: f64| g.dot(scenario.density(x), x);
    let mut prev = psi(t_end);
    let mut tv = 0.0;
    for j in 1..=steps {
        let x = t_end + (far - t_end) * j as f64 / steps as f64;
        let cur = psi(x);
        tv += (cur - prev).abs();
        prev = cur;
    }
    // Remaining drift to the limit beyond `far`, where f is negligible.
    tv + (prev - g.dot(0.0, far)).abs()
}
