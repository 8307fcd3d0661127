//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use rand::Rng;

/// `(x, y)` with strictly increasing x, ties pooled to the largest y.
pub fn pool_ties(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &(x, y) in points {
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = last.1.max(y),
            _ => out.push((x, y)),
        }
    }
    out
}

/// Upper hull by gift wrapping: from each vertex, step to the point of
/// largest slope, the farthest one on ties. Quadratic in the worst case.
pub fn jarvis_upper_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let p = pool_ties(points);
    let mut hull = vec![p[0]];
    let mut i = 0;
    while i + 1 < p.len() {
        let o = p[i];
        let mut best = i + 1;
        for c in i + 2..p.len() {
            let b = p[best];
            let q = p[c];
            let cross = (b.0 - o.0) * (q.1 - o.1) - (b.1 - o.1) * (q.0 - o.0);
            if cross >= 0.0 {
                best = c;
            }
        }
        hull.push(p[best]);
        i = best;
    }
    hull
}

/// Piecewise-linear interpolation through `knots`, constant outside.
pub fn eval_knots(knots: &[(f64, f64)], x: f64) -> f64 {
    if x <= knots[0].0 {
        return knots[0].1;
    }
    for w in knots.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x <= x1 {
            if x == x1 {
                return y1;
            }
            return y0 + (y1 - y0) * ((x - x0) / (x1 - x0));
        }
    }
    knots[knots.len() - 1].1
}

/// Decreasing step function as `(right endpoint, level)` blocks.
#[derive(Debug, Clone)]
pub struct Blocks(pub Vec<(f64, f64)>);

impl Blocks {
    /// Left-continuous evaluation on `(0, last]`, zero beyond.
    pub fn eval(&self, x: f64) -> f64 {
        for &(r, v) in &self.0 {
            if x <= r {
                return v;
            }
        }
        0.0
    }
}

/// Weighted antitonic regression of the raw slopes of the ECDF by pool
/// adjacent violators, weights equal to the gaps between distinct
/// observations. The ECDF is built here from scratch.
pub fn pava_grenander(values: &[f64]) -> Blocks {
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    // (right endpoint, count, width)
    let mut raw: Vec<(f64, f64, f64)> = Vec::new();
    let mut left = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let mut j = i;
        while j < xs.len() && xs[j] == xs[i] {
            j += 1;
        }
        let x = xs[i];
        let count = (j - i) as f64;
        if x == 0.0 {
            // Mass at the origin joins the first block of positive width.
            raw.push((0.0, count, 0.0));
        } else {
            raw.push((x, count, x - left));
        }
        left = x;
        i = j;
    }
    if raw[0].2 == 0.0 && raw.len() > 1 {
        let zero = raw.remove(0);
        raw[0].1 += zero.1;
    }
    let mut stack: Vec<(f64, f64, f64)> = Vec::new();
    for block in raw {
        stack.push(block);
        while stack.len() >= 2 {
            let k = stack.len();
            let (a, b) = (stack[k - 2], stack[k - 1]);
            if a.1 / a.2 <= b.1 / b.2 {
                stack.truncate(k - 2);
                stack.push((b.0, a.1 + b.1, a.2 + b.2));
            } else {
                break;
            }
        }
    }
    Blocks(
        stack
            .into_iter()
            .map(|(r, c, w)| (r, c / (n * w)))
            .collect(),
    )
}

/// Random points with sorted x: either small integers (exact arithmetic,
/// frequent ties and collinear triples) or continuous coordinates.
pub fn random_points<R: Rng>(rng: &mut R, max_len: usize) -> Vec<(f64, f64)> {
    let m = rng.random_range(1..=max_len);
    let integer = rng.random_bool(0.5);
    let mut pts: Vec<(f64, f64)> = (0..m)
        .map(|_| {
            if integer {
                (
                    rng.random_range(0..40) as f64,
                    rng.random_range(-20..20) as f64,
                )
            } else {
                (rng.random::<f64>() * 10.0, rng.random::<f64>() * 4.0 - 2.0)
            }
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

/// Closed forms for the two-slope density: `√2 + 1` on `[0, c]` and
/// `√2 − 1` on `(c, 1]` with `c = 1 − 1/√2`.
pub fn two_slope_levels() -> (f64, f64, f64) {
    let r = 2f64.sqrt();
    (r + 1.0, r - 1.0, 1.0 - 1.0 / r)
}

/// `(τ, σ²_eff)` of `h(z) = z²` under the two-slope density:
/// `∫f² = a²c + b²(1−c)` and `Var(2f(X)) = 4(∫f³ − (∫f²)²)`.
pub fn two_slope_square_constants() -> (f64, f64) {
    let (a, b, c) = two_slope_levels();
    let f2 = a * a * c + b * b * (1.0 - c);
    let f3 = a.powi(3) * c + b.powi(3) * (1.0 - c);
    (f2, 4.0 * (f3 - f2 * f2))
}

/// Mean and Monte Carlo standard error of the unbiased sample variance.
pub fn variance_with_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / m;
    let var = m2 * m / (m - 1.0);
    (var, ((m4 - m2 * m2) / m).sqrt())
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
