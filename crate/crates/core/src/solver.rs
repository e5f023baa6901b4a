//! Implicit-Euler finite-volume solver for `u_t = nu (u^-2 u_x)_x + f` with
//! zero-flux ends and unit mass.
//!
//! Control volumes are the trapezoid cells of the grid (`dx/2` at the ends).
//! The edge flux uses `u^-2 u_x = -(1/u)_x`, i.e.
//! `F_{i+1/2} = (1/u_i - 1/u_{i+1}) / dx`; its effective half-node
//! diffusivity is `1 / (u_i u_{i+1})`. In `q = nu^(1/2) / u` the update
//! reads `w (u^{k+1} - u^k) / dt = nu^(1/2) grad E_h(q^{k+1})` for the edge
//! energy `E_h`, so every implicit step dissipates `E_h` exactly and the
//! cell sums telescope to exact mass conservation.

use serde::Serialize;
use thiserror::Error as ThisError;

use crate::error::{Error, Result};
use crate::grid::{
    derivative, edge_gradient_energy, h1_norm, l2_norm, trapezoid_integral, Field, Grid,
};
use crate::source::SourceTerm;
use crate::steady::{steady_from_forcing, SteadyState};
use crate::tridiag::solve_tridiagonal;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_NEWTON_TOL: f64 = 1e-12;
pub const DEFAULT_NEWTON_MAX_ITER: usize = 50;
pub const DEFAULT_POSITIVITY_FLOOR: f64 = 1e-8;
pub const DEFAULT_SNAPSHOT_STRIDE: usize = 100;
const MAX_HALVINGS: usize = 10;

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub nu: f64,
    pub grid: Grid,
    pub u0: Field,
    pub source: SourceTerm,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_stride: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub positivity_floor: f64,
}

impl SimulationConfig {
    pub fn new(nu: f64, u0: Field, source: SourceTerm, t_end: f64) -> Self {
        Self {
            nu,
            grid: *u0.grid(),
            u0,
            source,
            dt: DEFAULT_DT,
            t_end,
            snapshot_stride: DEFAULT_SNAPSHOT_STRIDE,
            newton_tol: DEFAULT_NEWTON_TOL,
            newton_max_iter: DEFAULT_NEWTON_MAX_ITER,
            positivity_floor: DEFAULT_POSITIVITY_FLOOR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) {
            return Err(Error::Config(format!(
                "nu must be positive, got {}",
                self.nu
            )));
        }
        if !(self.dt > 0.0) || !(self.t_end > 0.0) {
            return Err(Error::Config("dt and t_end must be positive".into()));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Config("snapshot_stride must be at least 1".into()));
        }
        if *self.u0.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        if self.u0.min() <= self.positivity_floor {
            return Err(Error::Domain(format!(
                "u0 must stay above the positivity floor {}",
                self.positivity_floor
            )));
        }
        let mass = trapezoid_integral(&self.u0);
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::Config(format!("u0 must have unit mass, got {mass}")));
        }
        Ok(())
    }
}

/// `(nu / w_i) (F_{i+1/2} - F_{i-1/2})`, the discrete `nu (u^-2 u_x)_x`.
pub fn diffusion(u: &Field, nu: f64) -> Field {
    let grid = *u.grid();
    let v = u.values();
    let n = v.len();
    let dx = grid.dx();
    let flux: Vec<f64> = v
        .windows(2)
        .map(|w| (1.0 / w[0] - 1.0 / w[1]) / dx)
        .collect();
    let out = (0..n)
        .map(|i| {
            let right = if i + 1 < n { flux[i] } else { 0.0 };
            let left = if i > 0 { flux[i - 1] } else { 0.0 };
            nu * (right - left) / grid.weight(i)
        })
        .collect();
    Field::from_raw(grid, out)
}

/// Discrete right-hand side `nu (u^-2 u_x)_x + f`.
pub fn pde_rhs(u: &Field, forcing: &Field, nu: f64) -> Field {
    let d = diffusion(u, nu);
    d.zip_map(forcing, |a, b| a + b)
        .expect("forcing on the solution grid")
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub positivity_floor: f64,
}

impl From<&SimulationConfig> for NewtonOptions {
    fn from(cfg: &SimulationConfig) -> Self {
        Self {
            tol: cfg.newton_tol,
            max_iter: cfg.newton_max_iter,
            positivity_floor: cfg.positivity_floor,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub u: Field,
    pub iterations: usize,
    pub residual: f64,
}

struct StepSystem<'a> {
    grid: Grid,
    u_old: &'a [f64],
    forcing: &'a [f64],
    nu: f64,
    dt: f64,
}

impl StepSystem<'_> {
    /// `u - u_old - dt (nu/w (F+ - F-) + f)`, in units of u.
    fn residual(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let dx = self.grid.dx();
        let flux = |i: usize| (1.0 / u[i] - 1.0 / u[i + 1]) / dx;
        (0..n)
            .map(|i| {
                let right = if i + 1 < n { flux(i) } else { 0.0 };
                let left = if i > 0 { flux(i - 1) } else { 0.0 };
                let c = self.dt * self.nu / self.grid.weight(i);
                u[i] - self.u_old[i] - c * (right - left) - self.dt * self.forcing[i]
            })
            .collect()
    }

    fn jacobian(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = u.len();
        let dx = self.grid.dx();
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 0..n {
            let c = self.dt * self.nu / (self.grid.weight(i) * dx);
            let gi2 = 1.0 / (u[i] * u[i]);
            let mut d = 1.0;
            if i + 1 < n {
                d += c * gi2;
                upper[i] = -c / (u[i + 1] * u[i + 1]);
            }
            if i > 0 {
                d += c * gi2;
                lower[i] = -c / (u[i - 1] * u[i - 1]);
            }
            diag[i] = d;
        }
        (lower, diag, upper)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// One implicit-Euler step to time `t_new` with forcing sampled at `t_new`,
/// solved by damped Newton on the tridiagonal system.
pub fn implicit_euler_step(
    u_old: &Field,
    forcing: &Field,
    nu: f64,
    dt: f64,
    t_new: f64,
    opts: &NewtonOptions,
) -> Result<StepOutcome> {
    if u_old.grid() != forcing.grid() {
        return Err(Error::GridMismatch);
    }
    let sys = StepSystem {
        grid: *u_old.grid(),
        u_old: u_old.values(),
        forcing: forcing.values(),
        nu,
        dt,
    };
    let mut u = u_old.values().to_vec();
    let mut r = sys.residual(&u);
    let mut rnorm = max_abs(&r);
    let mut iterations = 0;
    while rnorm > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::NewtonDiverged {
                t: t_new,
                iterations,
                residual: rnorm,
            });
        }
        iterations += 1;
        let (lower, diag, upper) = sys.jacobian(&u);
        let mut delta: Vec<f64> = r.iter().map(|v| -v).collect();
        solve_tridiagonal(&lower, &diag, &upper, &mut delta)?;

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
            if cand.iter().all(|&v| v > opts.positivity_floor) {
                let rc = sys.residual(&cand);
                let nc = max_abs(&rc);
                if nc < rnorm {
                    accepted = Some((cand, rc, nc));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((cand, rc, nc)) => {
                u = cand;
                r = rc;
                rnorm = nc;
            }
            // stagnation at round-off just above the tolerance
            None if rnorm <= 100.0 * opts.tol => break,
            None => {
                return Err(Error::NewtonDiverged {
                    t: t_new,
                    iterations,
                    residual: rnorm,
                })
            }
        }
    }
    let min_u = u.iter().copied().fold(f64::INFINITY, f64::min);
    if min_u <= opts.positivity_floor {
        return Err(Error::Quenching { t: t_new, min_u });
    }
    Ok(StepOutcome {
        u: Field::from_raw(sys.grid, u),
        iterations,
        residual: rnorm,
    })
}

/// Advances `u` from `t` to `t + cfg.dt`.
pub fn step(u: &Field, t: f64, cfg: &SimulationConfig) -> Result<StepOutcome> {
    let t_new = t + cfg.dt;
    let forcing = cfg.source.evaluate(&cfg.grid, t_new)?;
    implicit_euler_step(
        u,
        &forcing,
        cfg.nu,
        cfg.dt,
        t_new,
        &NewtonOptions::from(cfg),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub t: f64,
    pub mass: f64,
    /// `int [q_x^2 / 2 + nu^(-1/2) f q]`, gradient part on edges.
    pub energy: f64,
    /// `int (q - q_inf)_x^2 / 2` on edges.
    pub relative_energy: f64,
    /// `||1/u - 1/u_inf||_H1`
    pub h1_error_inverse: f64,
    /// `||u - u_inf||_H1`
    pub h1_error_direct: f64,
    /// `||q_x||_2`
    pub q_x_norm: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub newton_iters: usize,
}

pub fn diagnostics_with_forcing(
    u: &Field,
    t: f64,
    forcing: &Field,
    nu: f64,
    steady: &SteadyState,
    newton_iters: usize,
) -> Result<DiagnosticRow> {
    let s = nu.sqrt();
    let q = u.map(|v| s / v);
    let coupling = trapezoid_integral(&forcing.zip_map(&q, |f, q| f * q)?);
    let energy = 0.5 * edge_gradient_energy(&q) + coupling / s;
    let w = q.zip_map(&steady.q_infinity(), |a, b| a - b)?;
    let inv_err = u.zip_map(&steady.u_infinity, |a, b| 1.0 / a - 1.0 / b)?;
    let dir_err = u.zip_map(&steady.u_infinity, |a, b| a - b)?;
    Ok(DiagnosticRow {
        t,
        mass: trapezoid_integral(u),
        energy,
        relative_energy: 0.5 * edge_gradient_energy(&w),
        h1_error_inverse: h1_norm(&inv_err),
        h1_error_direct: h1_norm(&dir_err),
        q_x_norm: l2_norm(&derivative(&q)),
        min_u: u.min(),
        max_u: u.max(),
        newton_iters,
    })
}

pub fn diagnostics(
    u: &Field,
    t: f64,
    cfg: &SimulationConfig,
    steady: &SteadyState,
    newton_iters: usize,
) -> Result<DiagnosticRow> {
    let forcing = cfg.source.evaluate(&cfg.grid, t)?;
    diagnostics_with_forcing(u, t, &forcing, cfg.nu, steady, newton_iters)
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub u: Field,
    /// Discrete right-hand side at `(u, t)`, i.e. `u_t`.
    pub u_t: Field,
}

#[derive(Debug, Clone)]
pub struct SimulationRecord {
    pub nu: f64,
    pub dt: f64,
    pub steady: SteadyState,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<DiagnosticRow>,
}

impl SimulationRecord {
    pub fn times(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.t).collect()
    }

    pub fn final_state(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    pub fn snapshot_near(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    pub fn max_mass_defect(&self) -> f64 {
        self.diagnostics
            .iter()
            .fold(0.0, |m, d| m.max((d.mass - 1.0).abs()))
    }

    pub fn write_diagnostics_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path)?;
        wtr.write_record([
            "t",
            "mass",
            "energy",
            "relative_energy",
            "h1_error_inverse",
            "h1_error_direct",
            "q_x_norm",
            "min_u",
            "max_u",
            "newton_iters",
        ])?;
        let f = crate::grid::fmt_f64;
        for d in &self.diagnostics {
            wtr.write_record([
                f(d.t),
                f(d.mass),
                f(d.energy),
                f(d.relative_energy),
                f(d.h1_error_inverse),
                f(d.h1_error_direct),
                f(d.q_x_norm),
                f(d.min_u),
                f(d.max_u),
                d.newton_iters.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Debug, ThisError)]
#[error("simulation failed at t = {t}: {error}")]
pub struct SimulationFailure {
    pub t: f64,
    #[source]
    pub error: Error,
    /// Everything recorded before the failure; `None` if setup failed.
    pub partial: Option<Box<SimulationRecord>>,
}

/// Steady state the run is measured against: the limit of the forcing when
/// declared, otherwise the initial forcing.
pub fn reference_steady(cfg: &SimulationConfig) -> Result<SteadyState> {
    let forcing = match cfg.source.limit(&cfg.grid)? {
        Some(f) => f,
        None => cfg.source.initial(&cfg.grid)?,
    };
    steady_from_forcing(&forcing, cfg.nu)
}

pub fn simulate(
    cfg: &SimulationConfig,
) -> std::result::Result<SimulationRecord, SimulationFailure> {
    let setup_failure = |error| SimulationFailure {
        t: 0.0,
        error,
        partial: None,
    };
    cfg.validate().map_err(setup_failure)?;
    let steady = reference_steady(cfg).map_err(setup_failure)?;
    let mut record = SimulationRecord {
        nu: cfg.nu,
        dt: cfg.dt,
        steady,
        snapshots: Vec::new(),
        diagnostics: Vec::new(),
    };

    let opts = NewtonOptions::from(cfg);
    let n_steps = ((cfg.t_end / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    let mut u = cfg.u0.clone();
    let mut t = 0.0;

    let mut run = |record: &mut SimulationRecord| -> Result<()> {
        let forcing = cfg.source.evaluate(&cfg.grid, 0.0)?;
        record.diagnostics.push(diagnostics_with_forcing(
            &u,
            0.0,
            &forcing,
            cfg.nu,
            &record.steady,
            0,
        )?);
        record.snapshots.push(Snapshot {
            t: 0.0,
            u_t: pde_rhs(&u, &forcing, cfg.nu),
            u: u.clone(),
        });
        for k in 1..=n_steps {
            let t_new = if k == n_steps {
                cfg.t_end
            } else {
                k as f64 * cfg.dt
            };
            let forcing = cfg.source.evaluate(&cfg.grid, t_new)?;
            let out = implicit_euler_step(&u, &forcing, cfg.nu, t_new - t, t_new, &opts)?;
            u = out.u;
            t = t_new;
            record.diagnostics.push(diagnostics_with_forcing(
                &u,
                t,
                &forcing,
                cfg.nu,
                &record.steady,
                out.iterations,
            )?);
            if k % cfg.snapshot_stride == 0 || k == n_steps {
                record.snapshots.push(Snapshot {
                    t,
                    u_t: pde_rhs(&u, &forcing, cfg.nu),
                    u: u.clone(),
                });
            }
        }
        Ok(())
    };
    match run(&mut record) {
        Ok(()) => Ok(record),
        Err(error) => {
            let t_fail = match &error {
                Error::NewtonDiverged { t, .. } | Error::Quenching { t, .. } => *t,
                _ => record.diagnostics.last().map_or(0.0, |d| d.t),
            };
            Err(SimulationFailure {
                t: t_fail,
                error,
                partial: Some(Box::new(record)),
            })
        }
    }
}
