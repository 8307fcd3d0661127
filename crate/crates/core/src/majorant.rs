//! Least concave majorants of finite point sets.
//!
//! The hull is built with a single left-to-right stack scan. Turn tests use
//! the cross product of `(Δx, Δy)` pairs, so near-collinear triples are
//! decided without forming divided differences. Collinear interior points
//! never become knots, which keeps the knot set canonical.

use crate::error::{Error, Result};
use crate::limitlaw::GridPath;

/// Concave piecewise-linear function given by its knots. Linear between
/// knots, constant outside `[first knot, last knot]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearConcave {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinearConcave {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Slopes of the `len() - 1` linear pieces, nonincreasing.
    pub fn slopes(&self) -> Vec<f64> {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let k = self.knots.len();
        if x <= self.knots[0] {
            return self.values[0];
        }
        if x >= self.knots[k - 1] {
            return self.values[k - 1];
        }
        // knots[j] <= x < knots[j + 1]
        let j = self.knots.partition_point(|&t| t <= x) - 1;
        interpolate(
            self.knots[j],
            self.values[j],
            self.knots[j + 1],
            self.values[j + 1],
            x,
        )
    }
}

#[inline]
pub(crate) fn interpolate(x0: f64, y0: f64, x1: f64, y1: f64, x: f64) -> f64 {
    y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
}

/// Cross product of `a - o` and `b - o`; `>= 0` means `a` is on or below the
/// chord from `o` to `b`.
#[inline]
fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Indices of the upper-hull vertices of points with strictly increasing x.
pub(crate) fn upper_hull(xs: &[f64], ys: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len().min(64));
    for j in 0..xs.len() {
        let p = (xs[j], ys[j]);
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let (po, pa) = ((xs[o], ys[o]), (xs[a], ys[a]));
            let below = cross(po, pa, p) >= 0.0;
            // The cross product may call a turn that the rounded slopes
            // contradict; those would break slope monotonicity downstream.
            let slopes_rise = (pa.1 - po.1) / (pa.0 - po.0) < (p.1 - pa.1) / (p.0 - pa.0);
            if below || slopes_rise {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(j);
    }
    hull
}

/// Least concave majorant of `points` over `[a, b]`.
///
/// Points must be sorted by x; points sharing an x are pooled to their
/// largest y, and points outside `[a, b]` are ignored.
pub fn lcm(points: &[(f64, f64)], interval: (f64, f64)) -> Result<PiecewiseLinearConcave> {
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::InvalidInterval { a, b });
    }
    let mut xs: Vec<f64> = Vec::with_capacity(points.len());
    let mut ys: Vec<f64> = Vec::with_capacity(points.len());
    for (index, &(x, y)) in points.iter().enumerate() {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::NonFiniteCoordinate { index });
        }
        if index > 0 && x < points[index - 1].0 {
            return Err(Error::UnsortedPoints { index });
        }
        if x < a || x > b {
            continue;
        }
        match xs.last() {
            Some(&last) if last == x => {
                let top = ys.last_mut().expect("parallel vectors");
                *top = top.max(y);
            }
            _ => {
                xs.push(x);
                ys.push(y);
            }
        }
    }
    if xs.is_empty() {
        return Err(Error::NoPoints);
    }
    let hull = upper_hull(&xs, &ys);
    Ok(PiecewiseLinearConcave {
        knots: hull.iter().map(|&i| xs[i]).collect(),
        values: hull.iter().map(|&i| ys[i]).collect(),
    })
}

/// Replace the values of `path` on the grid points inside `[a, b]` by their
/// least concave majorant. Both endpoints must be grid points.
pub fn restricted_lcm(path: &GridPath, a: f64, b: f64) -> Result<GridPath> {
    let mut out = path.clone();
    restricted_lcm_in_place(out.values_mut_with_grid(), a, b)?;
    Ok(out)
}

pub(crate) fn restricted_lcm_in_place(
    (grid, values): (&[f64], &mut [f64]),
    a: f64,
    b: f64,
) -> Result<()> {
    let locate = |t: f64| {
        grid.binary_search_by(|g| g.total_cmp(&t))
            .map_err(|_| Error::OffGrid { value: t })
    };
    let (ia, ib) = (locate(a)?, locate(b)?);
    if ia > ib {
        return Err(Error::InvalidInterval { a, b });
    }
    let xs = &grid[ia..=ib];
    let hull = upper_hull(xs, &values[ia..=ib]);
    for w in hull.windows(2) {
        let (l, r) = (w[0] + ia, w[1] + ia);
        let (x0, y0, x1, y1) = (grid[l], values[l], grid[r], values[r]);
        for j in l + 1..r {
            values[j] = interpolate(x0, y0, x1, y1, grid[j]);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_points_collapse_to_endpoints() {
        let h = lcm(&[(0.0, 0.0), (1.0, 0.5), (2.0, 1.0)], (0.0, 2.0)).unwrap();
        assert_eq!(h.knots(), &[0.0, 2.0]);
        assert_eq!(h.values(), &[0.0, 1.0]);
        assert_eq!(h.evaluate(1.0), 0.5);
        assert_eq!(h.slopes(), vec![0.5]);
    }

    #[test]
    fn interior_violator_is_pooled() {
        let h = lcm(&[(0.0, 0.0), (2.0, 0.5), (3.0, 1.0)], (0.0, 3.0)).unwrap();
        assert_eq!(h.knots(), &[0.0, 3.0]);
        assert!((h.slopes()[0] - 1.0 / 3.0).abs() < 1e-16);
        assert!(h.evaluate(2.0) > 0.5);
    }

    #[test]
    fn ties_pool_to_max_and_outside_points_are_dropped() {
        let h = lcm(
            &[(-1.0, 9.0), (0.0, 0.0), (0.0, 0.3), (1.0, 1.0), (5.0, 9.0)],
            (0.0, 1.0),
        )
        .unwrap();
        assert_eq!(h.knots(), &[0.0, 1.0]);
        assert_eq!(h.values(), &[0.3, 1.0]);
    }

    #[test]
    fn errors() {
        assert!(matches!(lcm(&[], (0.0, 1.0)), Err(Error::NoPoints)));
        assert!(matches!(
            lcm(&[(0.0, f64::NAN)], (0.0, 1.0)),
            Err(Error::NonFiniteCoordinate { index: 0 })
        ));
        assert!(matches!(
            lcm(&[(1.0, 0.0), (0.5, 0.0)], (0.0, 1.0)),
            Err(Error::UnsortedPoints { index: 1 })
        ));
        assert!(matches!(
            lcm(&[(5.0, 0.0)], (0.0, 1.0)),
            Err(Error::NoPoints)
        ));
    }

    #[test]
    fn single_point_and_constant_extension() {
        let h = lcm(&[(0.5, 2.0)], (0.0, 1.0)).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.evaluate(0.0), 2.0);
        assert_eq!(h.evaluate(3.0), 2.0);
        let h = lcm(&[(0.0, 0.0), (1.0, 1.0)], (0.0, 1.0)).unwrap();
        assert_eq!(h.evaluate(7.0), 1.0);
    }

    #[test]
    fn restricted_lcm_replaces_dip_and_keeps_outside() {
        let grid = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let path = GridPath::new(grid, vec![5.0, 0.0, -1.0, 0.0, 5.0]).unwrap();
        let out = restricted_lcm(&path, 1.0, 3.0).unwrap();
        assert_eq!(out.values(), &[5.0, 0.0, 0.0, 0.0, 5.0]);
        let affine = GridPath::new(vec![0.0, 0.5, 1.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(restricted_lcm(&affine, 0.0, 1.0).unwrap(), affine);
        assert!(matches!(
            restricted_lcm(&path, 0.5, 3.0),
            Err(Error::OffGrid { value }) if value == 0.5
        ));
    }
}
