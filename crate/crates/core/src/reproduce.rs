//! The two worked examples as ready-made runs with their checks.
//!
//! * `ex-2-4`: sheet of unit height with velocity `sin(pi y)/2`, `nu = 1`,
//!   which maps to `u0 = 1`, `f = (pi/2) cos(pi x)`.
//! * `ex-3-3`: `u0 = 1`, `f = min{1, 1/t} cos(pi x)`, `nu = 10`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::constants::{TheoremConstants, TheoremMode};
use crate::decay::{
    check_direct_convergence, check_homogeneous_envelope, check_inhomogeneous_envelope, DecayReport,
};
use crate::error::{Error, Result};
use crate::grid::{h1_norm, Grid};
use crate::solver::{simulate, SimulationConfig, SimulationFailure, SimulationRecord};
use crate::source::{AnalyticFamily, SourceTerm, DEFAULT_DT_QUAD, DEFAULT_T_CUT};
use crate::steady::{steady_profile, Limit, SteadyReport};

pub const DEFAULT_N: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    SheetCosine,
    DecayingCosine,
}

impl Example {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ex-2-4" => Ok(Self::SheetCosine),
            "ex-3-3" => Ok(Self::DecayingCosine),
            _ => Err(Error::Config(format!(
                "unknown example `{s}` (expected ex-2-4 or ex-3-3)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::SheetCosine => "ex-2-4",
            Self::DecayingCosine => "ex-3-3",
        }
    }

    pub fn nu(&self) -> f64 {
        match self {
            Self::SheetCosine => 1.0,
            Self::DecayingCosine => 10.0,
        }
    }

    pub fn family(&self) -> AnalyticFamily {
        match self {
            Self::SheetCosine => AnalyticFamily::CosineStatic {
                amplitude: PI / 2.0,
            },
            Self::DecayingCosine => AnalyticFamily::CosineDecay { amplitude: 1.0 },
        }
    }

    pub fn source(&self) -> SourceTerm {
        SourceTerm::Analytic(self.family())
    }

    pub fn mode(&self) -> TheoremMode {
        match self {
            Self::SheetCosine => TheoremMode::Homogeneous,
            Self::DecayingCosine => TheoremMode::Inhomogeneous,
        }
    }

    pub fn default_t_end(&self) -> f64 {
        match self {
            Self::SheetCosine => 8.0,
            Self::DecayingCosine => 3.0,
        }
    }

    pub fn simulation(&self, n: usize, dt: f64, t_end: f64) -> Result<SimulationConfig> {
        let grid = Grid::new(n)?;
        let mut cfg = SimulationConfig::new(self.nu(), grid.constant(1.0), self.source(), t_end);
        cfg.dt = dt;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= limit,
            value,
            limit,
        }
    }

    fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            passed: value >= limit,
            value,
            limit,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExampleOutcome {
    pub example: Example,
    pub constants: TheoremConstants,
    pub steady: SteadyReport,
    pub record: SimulationRecord,
    pub envelope: DecayReport,
    pub direct: DecayReport,
    pub checks: Vec<Check>,
}

impl ExampleOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug)]
pub enum ExampleError {
    Setup(Error),
    Solver(SimulationFailure),
}

impl From<Error> for ExampleError {
    fn from(e: Error) -> Self {
        Self::Setup(e)
    }
}

/// Steady report with `C_inf` filled in for `a cos(pi x)` forcing.
pub fn steady_report(src: &SourceTerm, grid: &Grid, nu: f64, which: Limit) -> Result<SteadyReport> {
    let s = steady_profile(src, grid, nu, which)?;
    let mut rep = s.report();
    if let SourceTerm::Analytic(AnalyticFamily::CosineStatic { amplitude }) = src {
        rep.c_infinity = Some(1.0 + PI * PI * s.c_nu / amplitude);
    }
    Ok(rep)
}

/// `||h_inf(y_inf(.)) - h0(y(., 0))||_H1` for a unit-mass sheet of unit
/// initial height, i.e. `||1/u_inf - 1||_H1`.
pub fn sheet_height_distance(src: &SourceTerm, grid: &Grid, nu: f64) -> Result<f64> {
    let s = steady_profile(src, grid, nu, Limit::Initial)?;
    Ok(h1_norm(&s.u_infinity.map(|u| 1.0 / u - 1.0)))
}

fn energy_increase(record: &SimulationRecord) -> f64 {
    record
        .diagnostics
        .windows(2)
        .fold(0.0, |m: f64, w| m.max(w[1].energy - w[0].energy))
}

fn bound_excess(record: &SimulationRecord, lower: f64, upper: f64) -> f64 {
    record
        .diagnostics
        .iter()
        .fold(0.0, |m: f64, d| m.max(lower - d.min_u).max(d.max_u - upper))
}

pub fn run_example(
    ex: Example,
    n: usize,
    dt: f64,
    t_end: f64,
) -> std::result::Result<ExampleOutcome, ExampleError> {
    let cfg = ex.simulation(n, dt, t_end)?;
    let grid = cfg.grid;
    let constants = TheoremConstants::for_problem(
        &cfg.u0,
        &cfg.source,
        cfg.nu,
        ex.mode(),
        DEFAULT_T_CUT,
        DEFAULT_DT_QUAD,
    )?;
    if !constants.admissible(ex.mode()) {
        return Err(Error::HypothesisViolated(format!(
            "{} data violate the convergence condition",
            ex.name()
        ))
        .into());
    }
    let limit = match ex.mode() {
        TheoremMode::Homogeneous => Limit::Initial,
        TheoremMode::Inhomogeneous => Limit::Final,
    };
    let steady = steady_report(&cfg.source, &grid, cfg.nu, limit)?;
    let record = simulate(&cfg).map_err(ExampleError::Solver)?;

    let mut checks = vec![Check::at_most(
        "mass_conservation",
        record.max_mass_defect(),
        1e-10,
    )];
    let (envelope, theory_rate) = match ex.mode() {
        TheoremMode::Homogeneous => {
            let rep = check_homogeneous_envelope(&record, &constants)?;
            let rate = rep.theory_rate;
            checks.push(Check::at_most(
                "energy_monotone",
                energy_increase(&record),
                1e-10,
            ));
            let q_max = record
                .diagnostics
                .iter()
                .fold(0.0, |m: f64, d| m.max(d.q_x_norm));
            checks.push(Check::at_most(
                "q_x_bound",
                q_max,
                constants.q_gradient_bound(),
            ));
            (rep, rate)
        }
        TheoremMode::Inhomogeneous => {
            let rep = check_inhomogeneous_envelope(&record, &constants, &cfg.source)?;
            let rate = rep.theory_rate;
            (rep, rate)
        }
    };
    if let Some((lo, hi)) = constants.u_bounds(ex.mode()) {
        checks.push(Check::at_most(
            "pointwise_bounds",
            bound_excess(&record, lo, hi),
            0.0,
        ));
    }
    checks.push(Check::at_most(
        "decay_envelope",
        envelope.envelope_margin,
        1.0 + envelope.tolerance,
    ));
    let direct = check_direct_convergence(&record, theory_rate, 10.0 * grid.dx() * grid.dx());
    if ex.mode() == TheoremMode::Homogeneous {
        checks.push(Check::at_least(
            "direct_rate",
            direct.fitted_rate.unwrap_or(0.0),
            (1.0 - direct.tolerance) * theory_rate,
        ));
    }
    let mut constants = constants;
    constants.fitted_prefactor = direct.fitted_prefactor;
    Ok(ExampleOutcome {
        example: ex,
        constants,
        steady,
        record,
        envelope,
        direct,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_names_roundtrip() {
        for ex in [Example::SheetCosine, Example::DecayingCosine] {
            assert_eq!(Example::parse(ex.name()).unwrap(), ex);
        }
        assert!(Example::parse("ex-9").is_err());
    }

    #[test]
    fn sheet_example_steady_constant() {
        let g = Grid::new(4097).unwrap();
        let ex = Example::SheetCosine;
        let rep = steady_report(&ex.source(), &g, ex.nu(), Limit::Initial).unwrap();
        let c = rep.c_infinity.unwrap();
        assert!((c - (4.0 * PI * PI + 1.0).sqrt()).abs() < 1e-4, "{c}");
    }

    #[test]
    fn sheet_example_distance() {
        let g = Grid::new(2001).unwrap();
        let d = sheet_height_distance(&Example::SheetCosine.source(), &g, 1.0).unwrap();
        assert!((d - 0.37).abs() < 0.01, "{d}");
    }

    #[test]
    fn coarse_sheet_example_passes() {
        let out = run_example(Example::SheetCosine, 101, 1e-2, 4.0).unwrap();
        for c in &out.checks {
            assert!(c.passed, "{c:?}");
        }
    }
}
