//! Data constants, admissibility tests, pointwise bounds and decay rates of
//! the homogeneous and time-inhomogeneous convergence theorems.
//!
//! The homogeneous regime needs `R0 < 1` and `nu > 2 P0 / (1 - R0)`; it
//! gives `nu / (nu (1 + R0) + 2 P0) <= u <= nu / (nu (1 - R0) - 2 P0)` and
//! the rate `pi^2 [nu (1 - R0) - 2 P0]^2 / nu`. The inhomogeneous regime
//! needs `R0 < 1` and `nu > nu_plus`; it gives `A_minus <= u <= A_plus`, the
//! rate `B = nu pi^2 / (2 A_plus^2)` and the prefactor
//! `C = nu^(-1/2) (A_minus^-2 + A_plus^-2)`. Setting `N_infinity = 0` makes
//! the second set collapse onto the first.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{derivative, l2_norm, Field};
use crate::source::{compute_n_infinity, compute_p0, SourceTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremMode {
    /// Time-independent forcing `f = f0`.
    Homogeneous,
    /// Forcing converging to `f_infinity`.
    Inhomogeneous,
}

impl TheoremMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "homogeneous" => Ok(Self::Homogeneous),
            "inhomogeneous" => Ok(Self::Inhomogeneous),
            other => Err(Error::Config(format!(
                "mode must be `homogeneous` or `inhomogeneous`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Hypotheses {
    pub hom: bool,
    pub inhom: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremConstants {
    #[serde(rename = "R0")]
    pub r0: f64,
    #[serde(rename = "P0")]
    pub p0: f64,
    #[serde(rename = "N_infinity")]
    pub n_infinity: f64,
    pub nu: f64,
    pub nu_plus: Option<f64>,
    #[serde(rename = "A_minus")]
    pub a_minus: Option<f64>,
    #[serde(rename = "A_plus")]
    pub a_plus: Option<f64>,
    /// Homogeneous pointwise bounds on `u`.
    pub u_lower_hom: Option<f64>,
    pub u_upper_hom: Option<f64>,
    pub lambda_hom: Option<f64>,
    #[serde(rename = "B")]
    pub b: Option<f64>,
    #[serde(rename = "C_big")]
    pub c_big: Option<f64>,
    pub hypotheses: Hypotheses,
    /// Observed prefactor of the direct `||u - u_inf||_H1` decay; filled in
    /// from a simulation, never a theory value.
    pub fitted_prefactor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub lambda_hom: f64,
    pub b: f64,
    pub c_big: f64,
}

/// `R0 = ||(1/u0)_x||_2`.
pub fn compute_r0(u0: &Field) -> Result<f64> {
    if let Some(i) = u0.values().iter().position(|&u| u <= 0.0) {
        return Err(Error::Domain(format!(
            "u0 must be positive, node {i} is {}",
            u0.values()[i]
        )));
    }
    Ok(l2_norm(&derivative(&u0.map(|u| 1.0 / u))))
}

fn require_r0_below_one(r0: f64) -> Result<()> {
    if !(r0 < 1.0) {
        return Err(Error::HypothesisViolated(format!(
            "R0 = {r0} must be below 1"
        )));
    }
    Ok(())
}

/// `2 P0 / (1 - R0)`, the homogeneous viscosity threshold.
pub fn homogeneous_threshold(r0: f64, p0: f64) -> Result<f64> {
    require_r0_below_one(r0)?;
    Ok(2.0 * p0 / (1.0 - r0))
}

/// `nu / (nu (1 + R0) + 2 P0) <= u <= nu / (nu (1 - R0) - 2 P0)`.
pub fn homogeneous_bounds(r0: f64, p0: f64, nu: f64) -> Result<(f64, f64)> {
    let threshold = homogeneous_threshold(r0, p0)?;
    if !(nu > threshold) {
        return Err(Error::HypothesisViolated(format!(
            "nu = {nu} must exceed 2 P0 / (1 - R0) = {threshold}"
        )));
    }
    Ok((
        nu / (nu * (1.0 + r0) + 2.0 * p0),
        nu / (nu * (1.0 - r0) - 2.0 * p0),
    ))
}

/// `pi^2 [nu (1 - R0) - 2 P0]^2 / nu`.
pub fn lambda_hom(r0: f64, p0: f64, nu: f64) -> Result<f64> {
    homogeneous_bounds(r0, p0, nu)?;
    let gap = nu * (1.0 - r0) - 2.0 * p0;
    Ok(PI * PI * gap * gap / nu)
}

pub fn compute_nu_plus(r0: f64, p0: f64, n_inf: f64) -> Result<f64> {
    require_r0_below_one(r0)?;
    let a = 2.0 * n_inf + p0 * (1.0 + r0);
    let disc = a * a - n_inf * n_inf * (1.0 - r0 * r0);
    if disc < 0.0 {
        return Err(Error::Domain(format!(
            "negative discriminant {disc} in nu_plus"
        )));
    }
    Ok((a + disc.sqrt()) / (1.0 - r0 * r0))
}

/// `2 N + P0 + sqrt((N + P0)^2 + 2 (N + P0) N + nu^2 R0^2 + 2 nu P0 R0)`.
fn bound_bracket(r0: f64, p0: f64, n_inf: f64, nu: f64) -> f64 {
    let s = n_inf + p0;
    2.0 * n_inf + p0 + (s * s + 2.0 * s * n_inf + nu * nu * r0 * r0 + 2.0 * nu * p0 * r0).sqrt()
}

/// `A_pm = nu / (nu -+ bracket)`, returned as `(A_minus, A_plus)`.
pub fn compute_a_bounds(r0: f64, p0: f64, n_inf: f64, nu: f64) -> Result<(f64, f64)> {
    let nu_plus = compute_nu_plus(r0, p0, n_inf)?;
    let k = bound_bracket(r0, p0, n_inf, nu);
    if !(nu > nu_plus) || !(nu > k) {
        return Err(Error::HypothesisViolated(format!(
            "nu = {nu} must exceed nu_plus = {nu_plus}"
        )));
    }
    Ok((nu / (nu + k), nu / (nu - k)))
}

/// `(B, C)` from the pointwise bounds.
pub fn inhomogeneous_rates(a_minus: f64, a_plus: f64, nu: f64) -> (f64, f64) {
    let b = nu * PI * PI / (2.0 * a_plus * a_plus);
    let c = (1.0 / (a_minus * a_minus) + 1.0 / (a_plus * a_plus)) / nu.sqrt();
    (b, c)
}

impl TheoremConstants {
    /// Evaluates everything that applies; inapplicable entries stay `None`.
    pub fn evaluate(r0: f64, p0: f64, n_infinity: f64, nu: f64) -> Self {
        let hom = homogeneous_bounds(r0, p0, nu).ok();
        let nu_plus = compute_nu_plus(r0, p0, n_infinity).ok();
        let a = compute_a_bounds(r0, p0, n_infinity, nu).ok();
        let (b, c_big) = match a {
            Some((am, ap)) => {
                let (b, c) = inhomogeneous_rates(am, ap, nu);
                (Some(b), Some(c))
            }
            None => (None, None),
        };
        Self {
            r0,
            p0,
            n_infinity,
            nu,
            nu_plus,
            a_minus: a.map(|v| v.0),
            a_plus: a.map(|v| v.1),
            u_lower_hom: hom.map(|v| v.0),
            u_upper_hom: hom.map(|v| v.1),
            lambda_hom: lambda_hom(r0, p0, nu).ok(),
            b,
            c_big,
            hypotheses: Hypotheses {
                hom: hom.is_some(),
                inhom: a.is_some(),
            },
            fitted_prefactor: None,
        }
    }

    /// Constants of a concrete problem. Homogeneous mode rejects
    /// time-dependent forcing instead of silently using `N_infinity = 0`.
    pub fn for_problem(
        u0: &Field,
        src: &SourceTerm,
        nu: f64,
        mode: TheoremMode,
        t_cut: f64,
        dt_quad: f64,
    ) -> Result<Self> {
        let grid = u0.grid();
        let r0 = compute_r0(u0)?;
        let p0 = compute_p0(src, grid)?;
        let n_infinity = match mode {
            TheoremMode::Homogeneous => {
                if !src.is_time_independent() {
                    return Err(Error::Config(
                        "homogeneous mode requires a time-independent source".into(),
                    ));
                }
                0.0
            }
            TheoremMode::Inhomogeneous => compute_n_infinity(src, grid, t_cut, dt_quad)?.value,
        };
        Ok(Self::evaluate(r0, p0, n_infinity, nu))
    }

    pub fn compute_rates(&self) -> Result<Rates> {
        let lambda_hom = lambda_hom(self.r0, self.p0, self.nu)?;
        let (am, ap) = compute_a_bounds(self.r0, self.p0, self.n_infinity, self.nu)?;
        let (b, c_big) = inhomogeneous_rates(am, ap, self.nu);
        Ok(Rates {
            lambda_hom,
            b,
            c_big,
        })
    }

    pub fn admissible(&self, mode: TheoremMode) -> bool {
        match mode {
            TheoremMode::Homogeneous => self.hypotheses.hom,
            TheoremMode::Inhomogeneous => self.hypotheses.inhom,
        }
    }

    /// Pointwise bounds on `u` for the chosen regime.
    pub fn u_bounds(&self, mode: TheoremMode) -> Option<(f64, f64)> {
        match mode {
            TheoremMode::Homogeneous => self.u_lower_hom.zip(self.u_upper_hom),
            TheoremMode::Inhomogeneous => self.a_minus.zip(self.a_plus),
        }
    }

    /// `(1 + (N + P0)/nu)^-1 <= u_inf <= (1 - (N + P0)/nu)^-1`.
    pub fn steady_bounds(&self) -> Option<(f64, f64)> {
        let s = (self.n_infinity + self.p0) / self.nu;
        (s < 1.0).then(|| (1.0 / (1.0 + s), 1.0 / (1.0 - s)))
    }

    /// `(1 + R0)^-1 <= u0 <= (1 - R0)^-1`.
    pub fn initial_bounds(&self) -> Option<(f64, f64)> {
        (self.r0 < 1.0).then(|| (1.0 / (1.0 + self.r0), 1.0 / (1.0 - self.r0)))
    }

    /// Upper bound on `||q_x||_2` in the homogeneous regime.
    pub fn q_gradient_bound(&self) -> f64 {
        2.0 * self.p0 / self.nu.sqrt() + self.nu.sqrt() * self.r0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::source::AnalyticFamily;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn r0_examples() {
        let g = Grid::new(2001).unwrap();
        assert_eq!(compute_r0(&g.constant(1.0)).unwrap(), 0.0);
        assert_eq!(compute_r0(&g.constant(2.0)).unwrap(), 0.0);
        let u0 = g.sample(|x| 1.0 / (1.0 + 0.1 * (PI * x).sin()));
        let r0 = compute_r0(&u0).unwrap();
        assert!((r0 - 0.1 * PI * FRAC_1_SQRT_2).abs() < 1e-4, "{r0}");
        let mut bad = vec![1.0; 2001];
        bad[7] = 0.0;
        assert!(matches!(
            compute_r0(&Field::new(g, bad).unwrap()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn nu_plus_examples() {
        let v = compute_nu_plus(0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap();
        assert!((v - (3.0 * FRAC_1_SQRT_2 + 2.0)).abs() < 1e-12);

        // with N = 0 the formula reduces to 2 P0 / (1 - R0)
        for p in [0.1, 0.35, 2.0] {
            let v = compute_nu_plus(0.0, p, 0.0).unwrap();
            assert!((v - 2.0 * p).abs() < 1e-14);
            assert!((v - homogeneous_threshold(0.0, p).unwrap()).abs() < 1e-14);
        }

        for n in [0.2, 1.0, 3.0] {
            let v = compute_nu_plus(0.0, 0.0, n).unwrap();
            assert!((v - (2.0 + 3f64.sqrt()) * n).abs() < 1e-12);
        }
        assert!(matches!(
            compute_nu_plus(1.0, 0.1, 0.1),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn a_bounds_examples() {
        let k = 3.0 * FRAC_1_SQRT_2 + 2.0;
        let (am, ap) = compute_a_bounds(0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 10.0).unwrap();
        assert!((ap - 10.0 / (10.0 - k)).abs() < 1e-12);
        assert!((am - 10.0 / (10.0 + k)).abs() < 1e-12);
        assert!((ap - 1.7011).abs() < 1e-4 && (am - 0.7081).abs() < 1e-4);

        let (am, ap) = compute_a_bounds(0.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!((am, ap), (1.0, 1.0));

        let (r0, p0, nu) = (0.3, 0.2, 2.0);
        let (am, ap) = compute_a_bounds(r0, p0, 0.0, nu).unwrap();
        let (lo, hi) = homogeneous_bounds(r0, p0, nu).unwrap();
        assert!((am - lo).abs() < 1e-12 && (ap - hi).abs() < 1e-12);

        assert!(matches!(
            compute_a_bounds(0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 4.0),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn rate_examples() {
        let p0 = 1.0 / (2.0 * 2f64.sqrt());
        let l = lambda_hom(0.0, p0, 1.0).unwrap();
        assert!((l - PI * PI * (1.0 - FRAC_1_SQRT_2).powi(2)).abs() < 1e-14);
        assert!((l - 0.8467).abs() < 1e-4);

        let c = TheoremConstants::evaluate(0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 10.0);
        let k = 3.0 * FRAC_1_SQRT_2 + 2.0;
        let b_reduced = PI * PI * (10.0 - k).powi(2) / 20.0;
        assert!((c.b.unwrap() - b_reduced).abs() < 1e-12);
        assert!((c.b.unwrap() - 17.06).abs() < 0.01);
        let c_reduced = 2.0 / 10f64.powf(2.5) * (100.0 + k * k);
        assert!((c.c_big.unwrap() - c_reduced).abs() < 1e-12);

        assert!((lambda_hom(0.0, 0.0, 1.0).unwrap() - PI * PI).abs() < 1e-14);
        assert!(lambda_hom(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn monotone_in_viscosity() {
        let (r0, p0, n) = (0.2, 0.3, 0.4);
        let thr = compute_nu_plus(r0, p0, n).unwrap();
        let mut prev: Option<(f64, f64, f64, f64)> = None;
        for k in 1..200 {
            let nu = thr * (1.0 + 0.05 * k as f64);
            let (am, ap) = compute_a_bounds(r0, p0, n, nu).unwrap();
            let (b, _) = inhomogeneous_rates(am, ap, nu);
            let l = lambda_hom(r0, p0, nu).unwrap();
            assert!(am > 0.0 && am <= 1.0 && ap >= 1.0);
            if let Some((pam, pap, pb, pl)) = prev {
                assert!(am > pam && ap < pap && b > pb && l > pl);
            }
            prev = Some((am, ap, b, l));
        }
    }

    #[test]
    fn homogeneous_mode_rejects_time_dependent_source() {
        let g = Grid::new(101).unwrap();
        let src = SourceTerm::Analytic(AnalyticFamily::CosineDecay { amplitude: 1.0 });
        let err = TheoremConstants::for_problem(
            &g.constant(1.0),
            &src,
            10.0,
            TheoremMode::Homogeneous,
            100.0,
            1e-2,
        );
        assert!(matches!(err, Err(Error::Config(_))));
        let ok = TheoremConstants::for_problem(
            &g.constant(1.0),
            &src,
            10.0,
            TheoremMode::Inhomogeneous,
            100.0,
            1e-2,
        )
        .unwrap();
        assert!(ok.hypotheses.inhom);
    }

    #[test]
    fn json_field_names() {
        let c = TheoremConstants::evaluate(0.0, 0.1, 0.0, 1.0);
        let v = serde_json::to_value(&c).unwrap();
        for key in [
            "R0",
            "P0",
            "N_infinity",
            "nu",
            "nu_plus",
            "A_minus",
            "A_plus",
            "lambda_hom",
            "B",
            "C_big",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["hypotheses"]["hom"], true);
        assert_eq!(v["hypotheses"]["inhom"], true);
    }
}
