//! Validation-grade solver for the viscous thin sheet
//! `h_t + (h v)_y = 0`, `v_t + v v_y = (nu / h) (h v_y)_y`
//! with `v = 0` and `h_y = 0` at both ends.
//!
//! Staggered grid: `h` lives on the cells between nodes, `v` on the nodes.
//! Height moves by first-order upwind conservative transport, so the cell
//! sum of `h` is conserved to round-off. Velocity is advanced by explicit
//! upwind advection followed by an implicit viscous solve.

use thiserror::Error as ThisError;

use super::SheetState;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::tridiag::solve_tridiagonal;

/// Smallest admissible internal step relative to the requested one.
const CFL_FLOOR_FACTOR: f64 = 1e-6;
const CFL: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct SheetSample {
    pub t: f64,
    pub state: SheetState,
}

#[derive(Debug, ThisError)]
#[error("thin-sheet solver failed at t = {t}: {error}")]
pub struct SsmFailure {
    pub t: f64,
    #[source]
    pub error: Error,
    pub partial: Vec<SheetSample>,
}

struct Staggered {
    grid: Grid,
    cells: Vec<f64>,
    v: Vec<f64>,
    nu: f64,
}

impl Staggered {
    fn from_state(s: &SheetState) -> Self {
        let h = s.h.values();
        let mut v = s.v.values().to_vec();
        let n = v.len();
        v[0] = 0.0;
        v[n - 1] = 0.0;
        Self {
            grid: s.y_grid,
            cells: h.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect(),
            v,
            nu: s.nu,
        }
    }

    fn node_heights(&self) -> Vec<f64> {
        let c = &self.cells;
        let m = c.len();
        let mut h = Vec::with_capacity(m + 1);
        h.push(c[0]);
        h.extend(c.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        h.push(c[m - 1]);
        h
    }

    fn to_state(&self) -> SheetState {
        let h = Field::from_raw(self.grid, self.node_heights());
        let v = Field::from_raw(self.grid, self.v.clone());
        SheetState {
            y_grid: self.grid,
            mass: self.cell_mass(),
            h,
            v,
            nu: self.nu,
        }
    }

    fn cell_mass(&self) -> f64 {
        self.cells.iter().sum::<f64>() * self.grid.dx()
    }

    fn max_speed(&self) -> f64 {
        self.v.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn step(&mut self, dt: f64, t: f64) -> Result<()> {
        let dy = self.grid.dx();
        let n = self.v.len();
        let c = &mut self.cells;

        // node i is the face between cells i-1 and i
        let mut flux = vec![0.0; n];
        for i in 1..n - 1 {
            let vi = self.v[i];
            flux[i] = vi * if vi > 0.0 { c[i - 1] } else { c[i] };
        }
        for j in 0..c.len() {
            c[j] -= dt / dy * (flux[j + 1] - flux[j]);
        }
        let min_h = c.iter().copied().fold(f64::INFINITY, f64::min);
        if min_h <= 0.0 {
            return Err(Error::HeightPositivity { t, min_h });
        }

        let old = self.v.clone();
        let mut rhs = old.clone();
        for i in 1..n - 1 {
            let vi = old[i];
            let grad = if vi > 0.0 {
                old[i] - old[i - 1]
            } else {
                old[i + 1] - old[i]
            };
            rhs[i] = vi - dt * vi * grad / dy;
        }

        let mut lower = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut upper = vec![0.0; n];
        rhs[0] = 0.0;
        rhs[n - 1] = 0.0;
        for i in 1..n - 1 {
            let h_node = 0.5 * (c[i - 1] + c[i]);
            let k = dt * self.nu / (h_node * dy * dy);
            lower[i] = -k * c[i - 1];
            upper[i] = -k * c[i];
            diag[i] = 1.0 + k * (c[i - 1] + c[i]);
        }
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs)?;
        self.v = rhs;
        Ok(())
    }
}

/// Integrates to `t_end` with steps of at most `dt`, cut down adaptively to
/// `CFL * dy / max|v|`. Returns states at `t = 0`, at every multiple of
/// `sample_every` and at `t_end`.
pub fn solve_ssm(
    initial: &SheetState,
    dt: f64,
    t_end: f64,
    sample_every: f64,
) -> std::result::Result<Vec<SheetSample>, SsmFailure> {
    let fail = |t, error, partial| SsmFailure { t, error, partial };
    if initial.h.min() <= 0.0 {
        return Err(fail(
            0.0,
            Error::HeightPositivity {
                t: 0.0,
                min_h: initial.h.min(),
            },
            Vec::new(),
        ));
    }
    if !(dt > 0.0) || !(t_end > 0.0) || !(sample_every > 0.0) {
        return Err(fail(
            0.0,
            Error::Config("dt, t_end and sample spacing must be positive".into()),
            Vec::new(),
        ));
    }
    let mut s = Staggered::from_state(initial);
    let dy = s.grid.dx();
    let mut t = 0.0;
    let mut samples = vec![SheetSample {
        t,
        state: s.to_state(),
    }];
    let mut next_sample = sample_every;
    let eps = 1e-12 * t_end;
    while t < t_end - eps {
        let speed = s.max_speed();
        let mut h = dt.min(t_end - t).min(next_sample - t);
        if speed > 0.0 {
            h = h.min(CFL * dy / speed);
        }
        if h < CFL_FLOOR_FACTOR * dt && t + h < t_end - eps && t + h < next_sample - eps {
            return Err(fail(
                t,
                Error::CflFloor {
                    t,
                    floor: CFL_FLOOR_FACTOR * dt,
                },
                samples,
            ));
        }
        if let Err(e) = s.step(h, t + h) {
            return Err(fail(t + h, e, samples));
        }
        t += h;
        if t >= next_sample - eps || t >= t_end - eps {
            samples.push(SheetSample {
                t,
                state: s.to_state(),
            });
            while next_sample <= t + eps {
                next_sample += sample_every;
            }
        }
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::trapezoid_integral;
    use std::f64::consts::PI;

    #[test]
    fn resting_sheet_is_stationary() {
        let g = Grid::new(51).unwrap();
        let s = SheetState::new(g.constant(2.0), g.zeros(), 1.0).unwrap();
        let out = solve_ssm(&s, 1e-2, 1.0, 0.5).unwrap();
        assert_eq!(out.len(), 3);
        let last = &out.last().unwrap().state;
        assert!(last.h.max_abs_diff(&g.constant(2.0)).unwrap() < 1e-14);
        assert_eq!(last.v.max_abs(), 0.0);
    }

    #[test]
    fn mass_is_conserved_and_nodes_agree_with_cells() {
        let g = Grid::new(101).unwrap();
        let h = g.sample(|y| 1.0 + 0.3 * (PI * y).cos());
        let v = g.sample(|y| 0.4 * (PI * y).sin());
        let s = SheetState::new(h, v, 0.5).unwrap();
        let m0 = trapezoid_integral(&s.h);
        let out = solve_ssm(&s, 1e-3, 0.5, 0.1).unwrap();
        for sample in &out {
            assert!((sample.state.mass - m0).abs() < 1e-13);
            assert!((trapezoid_integral(&sample.state.h) - m0).abs() < 1e-13);
            let v = sample.state.v.values();
            assert_eq!(v[0], 0.0);
            assert_eq!(v[v.len() - 1], 0.0);
        }
        let times: Vec<f64> = out.iter().map(|s| s.t).collect();
        assert_eq!(times.len(), 6);
        assert!((times[5] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn viscosity_damps_velocity() {
        let g = Grid::new(81).unwrap();
        let s = SheetState::new(g.constant(1.0), g.sample(|y| (PI * y).sin()), 1.0).unwrap();
        let out = solve_ssm(&s, 1e-3, 1.0, 1.0).unwrap();
        assert!(out.last().unwrap().state.v.max_abs() < 0.1);
    }
}
