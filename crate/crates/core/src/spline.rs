//! Clamped cubic spline on strictly increasing knots.
//!
//! Used to evaluate nodal profiles at off-grid points: `h0(y)` along the
//! initial Lagrangian map and Eulerian heights at Lagrangian positions.

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::tridiag::solve_tridiagonal;

#[derive(Debug, Clone)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    moments: Vec<f64>,
}

impl CubicSpline {
    /// Spline with prescribed end slopes `s0` and `s1`.
    pub fn clamped(knots: Vec<f64>, values: Vec<f64>, s0: f64, s1: f64) -> Result<Self> {
        let n = knots.len();
        if n < 2 || values.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: values.len(),
            });
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(
                "spline knots must be strictly increasing".into(),
            ));
        }
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let slope = |i: usize| (values[i + 1] - values[i]) / h[i];
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 2.0 * h[0];
        upper[0] = h[0];
        rhs[0] = 6.0 * (slope(0) - s0);
        for i in 1..n - 1 {
            lower[i] = h[i - 1];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            upper[i] = h[i];
            rhs[i] = 6.0 * (slope(i) - slope(i - 1));
        }
        lower[n - 1] = h[n - 2];
        diag[n - 1] = 2.0 * h[n - 2];
        rhs[n - 1] = 6.0 * (s1 - slope(n - 2));
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs)?;
        Ok(Self {
            knots,
            values,
            moments: rhs,
        })
    }

    /// Spline through a uniform-grid field, end slopes from fourth-order
    /// one-sided differences.
    pub fn from_field(f: &Field) -> Result<Self> {
        let v = f.values();
        let h = f.grid().dx();
        let n = v.len();
        let (s0, s1) = if n >= 5 {
            (
                (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h),
                (25.0 * v[n - 1] - 48.0 * v[n - 2] + 36.0 * v[n - 3] - 16.0 * v[n - 4]
                    + 3.0 * v[n - 5])
                    / (12.0 * h),
            )
        } else {
            (
                (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h),
                (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h),
            )
        };
        Self::clamped(f.grid().nodes(), v.to_vec(), s0, s1)
    }

    /// Spline on arbitrary increasing knots, end slopes from the three-point
    /// Lagrange polynomial at each end.
    pub fn from_points(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 3 || values.len() != n {
            return Err(Error::LengthMismatch {
                expected: n.max(3),
                got: values.len(),
            });
        }
        let three_point = |x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64, at: f64| {
            y0 * (2.0 * at - x1 - x2) / ((x0 - x1) * (x0 - x2))
                + y1 * (2.0 * at - x0 - x2) / ((x1 - x0) * (x1 - x2))
                + y2 * (2.0 * at - x0 - x1) / ((x2 - x0) * (x2 - x1))
        };
        let s0 = three_point(
            knots[0], knots[1], knots[2], values[0], values[1], values[2], knots[0],
        );
        let s1 = three_point(
            knots[n - 3],
            knots[n - 2],
            knots[n - 1],
            values[n - 3],
            values[n - 2],
            values[n - 1],
            knots[n - 1],
        );
        Self::clamped(knots, values, s0, s1)
    }

    fn interval(&self, x: f64) -> usize {
        let n = self.knots.len();
        let idx = self.knots.partition_point(|&k| k <= x);
        idx.clamp(1, n - 1) - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.interval(x);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let (a, b) = (x1 - x, x - x0);
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        m0 * a * a * a / (6.0 * h)
            + m1 * b * b * b / (6.0 * h)
            + (self.values[i] / h - m0 * h / 6.0) * a
            + (self.values[i + 1] / h - m1 * h / 6.0) * b
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.interval(x);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let (a, b) = (x1 - x, x - x0);
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) + (self.values[i + 1] - self.values[i]) / h
            - (m1 - m0) * h / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    #[test]
    fn reproduces_cubics_exactly() {
        let g = Grid::new(9).unwrap();
        let f = g.sample(|x| x * x * x - 2.0 * x + 1.0);
        let s = CubicSpline::clamped(g.nodes(), f.values().to_vec(), -2.0, 1.0).unwrap();
        for &x in &[0.03, 0.31, 0.5, 0.77, 0.999] {
            assert!((s.eval(x) - (x * x * x - 2.0 * x + 1.0)).abs() < 1e-13);
            assert!((s.derivative(x) - (3.0 * x * x - 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_interpolation_is_fourth_order() {
        let err = |n: usize| {
            let g = Grid::new(n).unwrap();
            let s = CubicSpline::from_field(&g.sample(|x| (PI * x).sin())).unwrap();
            (0..200)
                .map(|k| {
                    let x = (k as f64 + 0.37) / 200.0;
                    (s.eval(x) - (PI * x).sin()).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(21) / err(41);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn nonuniform_knots() {
        let knots: Vec<f64> = (0..30).map(|i| (i as f64 / 29.0).powf(1.3)).collect();
        let values: Vec<f64> = knots.iter().map(|x| (PI * x).cos()).collect();
        let s = CubicSpline::from_points(knots, values).unwrap();
        assert!((s.eval(0.4) - (0.4 * PI).cos()).abs() < 1e-4);
    }
}
