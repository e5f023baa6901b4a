//! Explicit steady state `u_inf = nu / (F2 + C_nu)`, where `F2` is the double
//! primitive of the forcing and `C_nu` fixes unit mass.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{antiderivative, l2_norm, trapezoid_integral, Field, Grid};
use crate::solver::pde_rhs;
use crate::source::{project_mean_zero, SourceTerm};

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub u_infinity: Field,
    pub c_nu: f64,
    /// `int_0^x int_0^y f ds dy`
    pub f2: Field,
    pub nu: f64,
    /// L2 norm of the discrete `nu (u^-2 u_x)_x + f` at `u_infinity`.
    pub residual_l2: f64,
    /// `int u_infinity - 1`
    pub mass_defect: f64,
}

impl SteadyState {
    /// `q_inf = nu^(1/2) / u_inf`, the minimiser of the q-energy.
    pub fn q_infinity(&self) -> Field {
        let s = self.nu.sqrt();
        self.u_infinity.map(|u| s / u)
    }

    pub fn inverse(&self) -> Field {
        self.u_infinity.map(|u| 1.0 / u)
    }

    pub fn report(&self) -> SteadyReport {
        SteadyReport {
            c_nu: self.c_nu,
            residual_l2: self.residual_l2,
            mass_defect: self.mass_defect,
            c_infinity: None,
            u_min: self.u_infinity.min(),
            u_max: self.u_infinity.max(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyReport {
    #[serde(rename = "C_nu")]
    pub c_nu: f64,
    pub residual_l2: f64,
    pub mass_defect: f64,
    /// For `a cos(pi x)` forcing, `h_inf = (a / (nu pi^2)) (C_inf - cos(pi x))`
    /// at unit mass, i.e. `C_inf = 1 + pi^2 C_nu / a`.
    #[serde(rename = "C_infinity", skip_serializing_if = "Option::is_none")]
    pub c_infinity: Option<f64>,
    pub u_min: f64,
    pub u_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    /// Steady state of the initial forcing `f0`.
    Initial,
    /// Steady state of the long-time forcing `f_inf`.
    Final,
}

pub fn double_primitive(f0: &Field) -> Field {
    antiderivative(&antiderivative(f0))
}

fn mass_integral(f2: &Field, c: f64) -> f64 {
    trapezoid_integral(&f2.map(|v| 1.0 / (v + c)))
}

/// Root `C` of `int (F2 + C)^-1 dx = 1/nu`, by bisection.
///
/// `G(C) = int (F2 + C)^-1` decreases strictly on `C > -min F2`, so the root
/// is unique once bracketed.
pub fn solve_cnu(f2: &Field, nu: f64) -> Result<f64> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!(
            "viscosity must be positive, got {nu}"
        )));
    }
    let target = 1.0 / nu;
    let floor = -f2.min();
    let span = f2.max() - f2.min();

    let mut delta = 1e-3 * if span > 0.0 { span } else { 1.0 };
    let mut lo = floor + delta;
    let mut scans = 0;
    while mass_integral(f2, lo) <= target {
        delta *= 0.1;
        lo = floor + delta;
        scans += 1;
        if scans > 300 || lo <= floor {
            return Err(Error::NoRoot(format!(
                "mass integral stays below 1/nu = {target} next to the singular end"
            )));
        }
    }
    let mut hi = floor + span.max(1.0);
    let mut doublings = 0;
    while mass_integral(f2, hi) >= target {
        hi = floor + 2.0 * (hi - floor);
        doublings += 1;
        if doublings > 2000 || !hi.is_finite() {
            return Err(Error::NoRoot(format!(
                "mass integral never drops below 1/nu = {target}"
            )));
        }
    }

    let mut g_lo = mass_integral(f2, lo);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let g = mass_integral(f2, mid);
        debug_assert!(g_lo >= g, "mass integral must decrease in C");
        if (g - target).abs() <= 1e-14 * target {
            return Ok(mid);
        }
        if g > target {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
        }
    }
}

/// Steady state of a given (mean-zero) forcing field.
pub fn steady_from_forcing(forcing: &Field, nu: f64) -> Result<SteadyState> {
    let forcing = project_mean_zero(forcing);
    let f2 = double_primitive(&forcing);
    let c_nu = solve_cnu(&f2, nu)?;
    let denom_min = f2.min() + c_nu;
    if denom_min <= 0.0 {
        return Err(Error::SingularSteadyState(denom_min));
    }
    let u_infinity = f2.map(|v| nu / (v + c_nu));
    let mass_defect = trapezoid_integral(&u_infinity) - 1.0;
    let residual_l2 = l2_norm(&pde_rhs(&u_infinity, &forcing, nu));
    Ok(SteadyState {
        u_infinity,
        c_nu,
        f2,
        nu,
        residual_l2,
        mass_defect,
    })
}

pub fn steady_profile(src: &SourceTerm, grid: &Grid, nu: f64, which: Limit) -> Result<SteadyState> {
    let forcing = match which {
        Limit::Initial => src.initial(grid)?,
        Limit::Final => src
            .limit(grid)?
            .ok_or_else(|| Error::Unsupported("source declares no long-time limit".into()))?,
    };
    steady_from_forcing(&forcing, nu)
}
