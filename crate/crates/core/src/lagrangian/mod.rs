//! Dictionary between the Lagrangian variable `u` on `x in [0,1]` and the
//! thin-sheet height/velocity `(h, v)` on the Eulerian coordinate `y`.
//!
//! The map `y(x,t)` satisfies `y_x = M / h(y)` and `y_t = v(y)`, so that
//! `u = y_x` has unit mass whenever `int h dy = M`.

pub mod ssm;

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{antiderivative, trapezoid_integral, write_columns_csv, Field, Grid};
use crate::source::project_mean_zero;
use crate::spline::CubicSpline;
use crate::steady::SteadyState;

const MAP_END_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct LagrangianMap {
    /// Strictly increasing, `y(0) = 0`, `y(1) = 1`.
    pub y_of_x: Field,
    /// `y_x = M / h(y)`
    pub u: Field,
}

/// Sheet on the uniform Eulerian grid.
#[derive(Debug, Clone)]
pub struct SheetState {
    pub y_grid: Grid,
    pub h: Field,
    pub v: Field,
    pub mass: f64,
    pub nu: f64,
}

impl SheetState {
    pub fn new(h: Field, v: Field, nu: f64) -> Result<Self> {
        if h.grid() != v.grid() {
            return Err(Error::GridMismatch);
        }
        if h.min() <= 0.0 {
            return Err(Error::Domain("sheet height must be positive".into()));
        }
        Ok(Self {
            y_grid: *h.grid(),
            mass: trapezoid_integral(&h),
            h,
            v,
            nu,
        })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_columns_csv(
            path,
            &["y", "h", "v"],
            &[&self.y_grid.nodes(), self.h.values(), self.v.values()],
        )
    }
}

/// Sheet sampled at the Lagrangian positions `y(x_i)`.
#[derive(Debug, Clone)]
pub struct SheetOnMap {
    pub y: Field,
    pub h: Field,
    pub v: Field,
    pub mass: f64,
}

impl SheetOnMap {
    /// Resamples onto a uniform `y` grid by spline interpolation.
    pub fn to_eulerian(&self, y_grid: &Grid, nu: f64) -> Result<SheetState> {
        let knots = self.y.values().to_vec();
        let hs = CubicSpline::from_points(knots.clone(), self.h.values().to_vec())?;
        let vs = CubicSpline::from_points(knots, self.v.values().to_vec())?;
        let mut vals: Vec<f64> = y_grid.nodes().iter().map(|&y| vs.eval(y)).collect();
        let n = vals.len();
        vals[0] = 0.0;
        vals[n - 1] = 0.0;
        Ok(SheetState {
            y_grid: *y_grid,
            h: y_grid.sample(|y| hs.eval(y)),
            v: Field::from_raw(*y_grid, vals),
            mass: self.mass,
            nu,
        })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let x = self.y.grid().nodes();
        write_columns_csv(
            path,
            &["x", "y", "h", "v"],
            &[&x, self.y.values(), self.h.values(), self.v.values()],
        )
    }
}

/// Solves `y_x = M / h0(y)`, `y(0) = 0` by classical RK4 on the grid of `h0`.
pub fn initial_map(h0: &Field, mass: f64) -> Result<LagrangianMap> {
    if h0.min() <= 0.0 {
        return Err(Error::Domain("initial height must be positive".into()));
    }
    if !(mass > 0.0) {
        return Err(Error::Domain(format!("mass must be positive, got {mass}")));
    }
    let grid = *h0.grid();
    let spline = CubicSpline::from_field(h0)?;
    let rhs = |y: f64| mass / spline.eval(y);
    let dx = grid.dx();
    let n = grid.n();
    let mut y = vec![0.0; n];
    for i in 1..n {
        let y0 = y[i - 1];
        let k1 = rhs(y0);
        let k2 = rhs(y0 + 0.5 * dx * k1);
        let k3 = rhs(y0 + 0.5 * dx * k2);
        let k4 = rhs(y0 + dx * k3);
        y[i] = y0 + dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    let end = y[n - 1];
    if (end - 1.0).abs() > MAP_END_TOL {
        return Err(Error::InconsistentMass(end));
    }
    y[n - 1] = 1.0;
    if y.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("initial map is not monotone".into()));
    }
    let u = y.iter().map(|&yi| rhs(yi)).collect();
    Ok(LagrangianMap {
        y_of_x: Field::from_raw(grid, y),
        u: Field::from_raw(grid, u),
    })
}

/// Forcing generated by sheet data: `f0(x) = d/dx [v0 + nu h0_y / h0](y(x,0))`,
/// projected to mean zero.
pub fn source_from_sheet(h0: &Field, v0: &Field, mass: f64, nu: f64) -> Result<Field> {
    if h0.grid() != v0.grid() {
        return Err(Error::GridMismatch);
    }
    let map = initial_map(h0, mass)?;
    let grid = *h0.grid();
    let hs = CubicSpline::from_field(h0)?;
    let phi: Vec<f64> = (0..grid.n())
        .map(|i| {
            let y = grid.x(i);
            v0.values()[i] + nu * hs.derivative(y) / h0.values()[i]
        })
        .collect();
    let phi = CubicSpline::from_field(&Field::from_raw(grid, phi))?;
    let composed = map.y_of_x.map(|y| phi.eval(y));
    let cs = CubicSpline::from_field(&composed)?;
    let f0 = grid.sample(|x| cs.derivative(x));
    Ok(project_mean_zero(&f0))
}

/// `y = int u`, `h(y) = M / u`, `v(y) = int u_t`.
pub fn sheet_from_u(u: &Field, u_t: &Field, mass: f64) -> Result<SheetOnMap> {
    if u.grid() != u_t.grid() {
        return Err(Error::GridMismatch);
    }
    if u.min() <= 0.0 {
        return Err(Error::Domain("u must be positive".into()));
    }
    Ok(SheetOnMap {
        y: antiderivative(u),
        h: u.map(|v| mass / v),
        v: antiderivative(u_t),
        mass,
    })
}

/// Limit map `y_inf = int u_inf` and height `h_inf(y_inf) = M / u_inf`.
pub fn limit_sheet(steady: &SteadyState, mass: f64) -> SheetOnMap {
    let u = &steady.u_infinity;
    SheetOnMap {
        y: antiderivative(u),
        h: u.map(|v| mass / v),
        v: u.grid().zeros(),
        mass,
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CrossCheck {
    pub t: f64,
    pub max_rel_error_h: f64,
}

/// Compares an Eulerian height with `M / u` along the map `y(x)`.
pub fn crosscheck(t: f64, sheet: &SheetState, from_u: &SheetOnMap) -> Result<CrossCheck> {
    let hs = CubicSpline::from_field(&sheet.h)?;
    let err = from_u
        .y
        .values()
        .iter()
        .zip(from_u.h.values())
        .fold(0.0, |m: f64, (&y, &h)| {
            m.max((hs.eval(y) - h).abs() / h.abs())
        });
    Ok(CrossCheck {
        t,
        max_rel_error_h: err,
    })
}
