//! Uniform node-centred grid on [0, 1], nodal fields, trapezoid quadrature,
//! finite differences and the L2 / H1 norms.
//!
//! Every profile in the crate (u, q, f, h, v) is a [`Field`] on a [`Grid`].
//! Quadrature is the composite trapezoid rule with weights `dx/2` at the two
//! end nodes and `dx` in the interior; the finite-volume solver uses the same
//! weights as its control volumes, which is what makes discrete mass
//! conservation exact.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    dx: f64,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self {
            n,
            dx: 1.0 / (n - 1) as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Position of node `i`; the last node is exactly 1.
    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            1.0
        } else {
            i as f64 * self.dx
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Trapezoid weight (control-volume length) of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: *self,
            values: (0..self.n).map(|i| f(self.x(i))).collect(),
        }
    }

    pub fn constant(&self, c: f64) -> Field {
        Field {
            grid: *self,
            values: vec![c; self.n],
        }
    }

    pub fn zeros(&self) -> Field {
        self.constant(0.0)
    }
}

/// Real nodal samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::LengthMismatch {
                expected: grid.n,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n);
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Nodewise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Field::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max_i |self_i - other_i|`.
    pub fn max_abs_diff(&self, other: &Field) -> Result<f64> {
        Ok(self.zip_map(other, |a, b| a - b)?.max_abs())
    }

    /// The field sampled at `1 - x`.
    pub fn reflect(&self) -> Field {
        let mut values = self.values.clone();
        values.reverse();
        Field::from_raw(self.grid, values)
    }

    pub fn write_csv(&self, path: &Path, name: &str) -> Result<()> {
        write_columns_csv(path, &["x", name], &[&self.grid.nodes(), &self.values])
    }
}

/// `sum dx (g_i + g_{i+1}) / 2`.
pub fn trapezoid_integral(g: &Field) -> f64 {
    let dx = g.grid.dx;
    g.values.windows(2).map(|w| 0.5 * dx * (w[0] + w[1])).sum()
}

/// Central differences inside, second-order one-sided differences at the ends.
pub fn derivative(g: &Field) -> Field {
    let n = g.grid.n;
    let h = g.grid.dx;
    let v = &g.values;
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    Field::from_raw(g.grid, out)
}

/// Cumulative trapezoid primitive with value 0 at x = 0.
pub fn antiderivative(g: &Field) -> Field {
    let dx = g.grid.dx;
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(g.len());
    out.push(0.0);
    for w in g.values.windows(2) {
        acc += 0.5 * dx * (w[0] + w[1]);
        out.push(acc);
    }
    Field::from_raw(g.grid, out)
}

pub fn l2_norm(g: &Field) -> f64 {
    trapezoid_integral(&g.map(|v| v * v)).sqrt()
}

pub fn h1_norm(g: &Field) -> f64 {
    let l2 = l2_norm(g);
    let d = l2_norm(&derivative(g));
    (l2 * l2 + d * d).sqrt()
}

/// Edge-based Dirichlet form `sum_edges (g_{i+1} - g_i)^2 / dx`, the discrete
/// `int g_x^2 dx` whose gradient is the finite-volume Laplacian.
pub fn edge_gradient_energy(g: &Field) -> f64 {
    let dx = g.grid.dx;
    g.values
        .windows(2)
        .map(|w| (w[1] - w[0]) * (w[1] - w[0]) / dx)
        .sum()
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes equal-length numeric columns with a header row, 17 significant digits.
pub fn write_columns_csv(path: &Path, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(headers)?;
    let rows = columns.first().map_or(0, |c| c.len());
    for r in 0..rows {
        wtr.write_record(columns.iter().map(|c| fmt_f64(c[r])))?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_rejects_too_few_nodes() {
        assert!(matches!(Grid::new(2), Err(Error::InvalidGrid(2))));
        let g = Grid::new(11).unwrap();
        assert_eq!(g.x(0), 0.0);
        assert_eq!(g.x(10), 1.0);
        assert!(((g.n() - 1) as f64 * g.dx() - 1.0).abs() < 1e-15);
        let nodes = g.nodes();
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn field_validation() {
        let g = Grid::new(5).unwrap();
        assert!(matches!(
            Field::new(g, vec![0.0; 4]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            Field::new(g, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite(2))
        ));
    }

    #[test]
    fn trapezoid_examples() {
        let g = Grid::new(11).unwrap();
        assert!((trapezoid_integral(&g.constant(1.0)) - 1.0).abs() < 1e-15);
        let g = Grid::new(101).unwrap();
        assert!((trapezoid_integral(&g.sample(|x| x)) - 0.5).abs() < 1e-14);
        let g = Grid::new(1001).unwrap();
        assert!(trapezoid_integral(&g.sample(|x| (PI * x).cos())).abs() < 1e-6);
    }

    #[test]
    fn derivative_examples() {
        let g = Grid::new(101).unwrap();
        assert_eq!(derivative(&g.constant(3.0)).max_abs(), 0.0);

        let d = derivative(&g.sample(|x| x * x));
        for i in 1..g.n() - 1 {
            assert!((d.values()[i] - 2.0 * g.x(i)).abs() < 1e-12);
        }

        let err = |n: usize| {
            let g = Grid::new(n).unwrap();
            let d = derivative(&g.sample(|x| (PI * x).sin()));
            d.max_abs_diff(&g.sample(|x| PI * (PI * x).cos())).unwrap()
        };
        let ratio = err(101) / err(201);
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn antiderivative_examples() {
        let g = Grid::new(101).unwrap();
        assert_eq!(antiderivative(&g.zeros()).max_abs(), 0.0);
        let a = antiderivative(&g.constant(1.0));
        assert!(a.max_abs_diff(&g.sample(|x| x)).unwrap() < 1e-14);

        let g = Grid::new(1001).unwrap();
        let a = antiderivative(&g.sample(|x| 0.5 * PI * (PI * x).cos()));
        assert!(a.max_abs_diff(&g.sample(|x| 0.5 * (PI * x).sin())).unwrap() < 1e-6);
        assert_eq!(a.values()[0], 0.0);
    }

    #[test]
    fn norm_examples() {
        let g = Grid::new(2001).unwrap();
        assert_eq!(l2_norm(&g.zeros()), 0.0);
        assert_eq!(h1_norm(&g.zeros()), 0.0);
        let s = g.sample(|x| (PI * x).sin());
        assert!((l2_norm(&s) - 0.5f64.sqrt()).abs() < 1e-6);

        // distance between the limiting and the flat sheet height
        let g = Grid::new(4001).unwrap();
        let c_inf = (4.0 * PI * PI + 1.0).sqrt();
        let d = g.sample(|x| (c_inf - (PI * x).cos()) / (2.0 * PI) - 1.0);
        assert!((h1_norm(&d) - 0.37).abs() < 0.01, "{}", h1_norm(&d));
    }

    #[test]
    fn discrete_poincare_on_sines() {
        let g = Grid::new(401).unwrap();
        for k in 1..=4 {
            let s = g.sample(|x| (k as f64 * PI * x).sin());
            let lhs = PI * l2_norm(&s);
            let rhs = l2_norm(&derivative(&s));
            assert!(lhs <= rhs + 1e-3, "k={k}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn edge_energy_matches_integral() {
        let g = Grid::new(801).unwrap();
        let s = g.sample(|x| (PI * x).cos());
        // int (pi sin)^2 = pi^2 / 2
        assert!((edge_gradient_energy(&s) - PI * PI / 2.0).abs() < 1e-4);
    }

    #[test]
    fn reflect_twice_is_identity() {
        let g = Grid::new(7).unwrap();
        let f = g.sample(|x| x * x + 1.0);
        assert_eq!(f.reflect().reflect(), f);
        assert_eq!(f.reflect().values()[0], f.values()[6]);
    }

    #[test]
    fn csv_has_seventeen_digits() {
        let g = Grid::new(3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        g.constant(1.0 / 3.0).write_csv(&path, "u").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,u"));
        let row = lines.next().unwrap();
        assert_eq!(row, "0.0000000000000000e0,3.3333333333333331e-1");
    }
}
