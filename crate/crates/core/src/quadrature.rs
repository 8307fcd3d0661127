//! Gauss–Legendre quadrature with bisection refinement.

use std::f64::consts::PI;

pub const DEFAULT_ORDER: usize = 16;
pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const MAX_REFINEMENTS: u32 = 10;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum();
        half * s
    }

    /// Composite rule on `2^level` equal subintervals.
    pub fn composite<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, level: u32) -> f64 {
        let m = 1usize << level;
        let h = (b - a) / m as f64;
        (0..m)
            .map(|j| {
                let lo = a + h * j as f64;
                let hi = if j + 1 == m { b } else { lo + h };
                self.integrate(f, lo, hi)
            })
            .sum()
    }

    /// Bisect `[a, b]` until two successive levels agree to `rel_tol`, at
    /// most `max_refinements` times. Returns the finest estimate and whether
    /// the tolerance was met.
    pub fn refine<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        rel_tol: f64,
        max_refinements: u32,
    ) -> (f64, bool) {
        if a == b {
            return (0.0, true);
        }
        let mut prev = self.composite(&f, a, b, 0);
        for level in 1..=max_refinements {
            let next = self.composite(&f, a, b, level);
            if (next - prev).abs() <= rel_tol * next.abs() || next == prev {
                return (next, true);
            }
            prev = next;
        }
        (prev, false)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
