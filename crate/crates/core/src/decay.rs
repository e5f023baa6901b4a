//! Empirical decay rates and envelope checks on simulation records.

use std::path::Path;

use serde::Serialize;

use crate::constants::TheoremConstants;
use crate::error::{Error, Result};
use crate::grid::{l2_norm, write_columns_csv};
use crate::solver::SimulationRecord;
use crate::source::SourceTerm;

pub const DEFAULT_FLOOR: f64 = 1e-9;
pub const DEFAULT_TOLERANCE: f64 = 0.05;
const MIN_FIT_SAMPLES: usize = 10;
/// Errors within this factor of the late-time plateau are kept out of fits.
const PLATEAU_FACTOR: f64 = 100.0;
/// Fraction of the record, counted from the end, that estimates the plateau.
const PLATEAU_TAIL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub rate: f64,
    pub prefactor: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Least squares of `log(error)` against `t`, from the first sample at or
/// below half the initial error to the last sample above `floor`.
pub fn fit_rate(times: &[f64], errors: &[f64], floor: f64) -> Result<RateFit> {
    if times.len() != errors.len() {
        return Err(Error::LengthMismatch {
            expected: times.len(),
            got: errors.len(),
        });
    }
    let above = errors.iter().filter(|&&e| e > floor).count();
    let insufficient = |got| Error::InsufficientSamples {
        needed: MIN_FIT_SAMPLES,
        got,
    };
    if errors.is_empty() || above < MIN_FIT_SAMPLES {
        return Err(insufficient(above));
    }
    let half = 0.5 * errors[0];
    let start = errors
        .iter()
        .position(|&e| e <= half)
        .ok_or(insufficient(0))?;
    let end = errors
        .iter()
        .rposition(|&e| e > floor)
        .ok_or(insufficient(0))?;
    if end < start {
        return Err(insufficient(0));
    }
    let (ts, ls): (Vec<f64>, Vec<f64>) = (start..=end)
        .filter(|&k| errors[k] > floor)
        .map(|k| (times[k], errors[k].ln()))
        .unzip();
    if ts.len() < MIN_FIT_SAMPLES {
        return Err(insufficient(ts.len()));
    }
    let m = ts.len() as f64;
    let t_mean = ts.iter().sum::<f64>() / m;
    let l_mean = ls.iter().sum::<f64>() / m;
    let sxy: f64 = ts
        .iter()
        .zip(&ls)
        .map(|(t, l)| (t - t_mean) * (l - l_mean))
        .sum();
    let sxx: f64 = ts.iter().map(|t| (t - t_mean).powi(2)).sum();
    if sxx == 0.0 {
        return Err(insufficient(1));
    }
    let slope = sxy / sxx;
    Ok(RateFit {
        rate: -slope,
        prefactor: (l_mean - slope * t_mean).exp(),
        window: (times[start], times[end]),
        samples: ts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopePoint {
    pub t: f64,
    pub bound: f64,
    pub observed: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub fitted_rate: Option<f64>,
    pub fitted_prefactor: Option<f64>,
    pub theory_rate: f64,
    pub envelope_ok: bool,
    /// max over recorded t of observed / bound
    pub envelope_margin: f64,
    pub fit_window: Option<(f64, f64)>,
    pub floor: f64,
    pub tolerance: f64,
    pub samples: usize,
    #[serde(skip)]
    pub series: Vec<EnvelopePoint>,
}

impl DecayReport {
    pub fn write_envelope_csv(&self, path: &Path) -> Result<()> {
        let t: Vec<f64> = self.series.iter().map(|p| p.t).collect();
        let b: Vec<f64> = self.series.iter().map(|p| p.bound).collect();
        let o: Vec<f64> = self.series.iter().map(|p| p.observed).collect();
        write_columns_csv(path, &["t", "bound", "observed"], &[&t, &b, &o])
    }
}

fn margin(series: &[EnvelopePoint]) -> f64 {
    series.iter().fold(0.0, |m: f64, p| {
        let r = if p.observed <= 0.0 {
            0.0
        } else if p.bound > 0.0 {
            p.observed / p.bound
        } else {
            f64::INFINITY
        };
        m.max(r)
    })
}

/// Floor actually used for fitting: the requested one, raised above the
/// plateau where the discrete solution settles onto its own fixed point.
/// The plateau is the median error over the last part of the record.
fn effective_floor(errors: &[f64], floor: f64) -> f64 {
    if errors.is_empty() {
        return floor;
    }
    let k = ((errors.len() as f64 * PLATEAU_TAIL).ceil() as usize).max(1);
    let mut tail = errors[errors.len() - k..].to_vec();
    tail.sort_by(f64::total_cmp);
    floor.max(PLATEAU_FACTOR * tail[tail.len() / 2])
}

fn report(
    times: &[f64],
    errors: &[f64],
    series: Vec<EnvelopePoint>,
    theory_rate: f64,
    floor: f64,
    tolerance: f64,
) -> DecayReport {
    let floor = effective_floor(errors, floor);
    let fit = fit_rate(times, errors, floor).ok();
    let envelope_margin = margin(&series);
    DecayReport {
        fitted_rate: fit.map(|f| f.rate),
        fitted_prefactor: fit.map(|f| f.prefactor),
        theory_rate,
        envelope_ok: envelope_margin <= 1.0 + tolerance,
        envelope_margin,
        fit_window: fit.map(|f| f.window),
        floor,
        tolerance,
        samples: fit.map_or(0, |f| f.samples),
        series,
    }
}

pub fn check_homogeneous_envelope(
    record: &SimulationRecord,
    consts: &TheoremConstants,
) -> Result<DecayReport> {
    if !consts.hypotheses.hom {
        return Err(Error::Inapplicable(
            "homogeneous convergence condition fails for these data".into(),
        ));
    }
    let rate = consts
        .lambda_hom
        .ok_or_else(|| Error::Inapplicable("no homogeneous decay rate".into()))?;
    Ok(check_homogeneous_envelope_with_rate(
        record,
        rate,
        DEFAULT_FLOOR,
        DEFAULT_TOLERANCE,
    ))
}

/// `||u^-1 - u_inf^-1||_H1 (t) <= (1 + tol) ||u0^-1 - u_inf^-1||_H1 e^(-rate t)`.
pub fn check_homogeneous_envelope_with_rate(
    record: &SimulationRecord,
    rate: f64,
    floor: f64,
    tolerance: f64,
) -> DecayReport {
    let times = record.times();
    let errors: Vec<f64> = record
        .diagnostics
        .iter()
        .map(|d| d.h1_error_inverse)
        .collect();
    let e0 = errors.first().copied().unwrap_or(0.0);
    let series = times
        .iter()
        .zip(&errors)
        .map(|(&t, &observed)| EnvelopePoint {
            t,
            bound: e0 * (-rate * t).exp(),
            observed,
        })
        .collect();
    report(&times, &errors, series, rate, floor, tolerance)
}

/// `||u^-1 - u_inf^-1||_H1 (t) <= e^(-Bt) [e0 + C int_0^t ||f(s) - f_inf||_2^2 e^(Bs) ds]`,
/// with the time integral by the trapezoid rule on the recorded times.
pub fn check_inhomogeneous_envelope(
    record: &SimulationRecord,
    consts: &TheoremConstants,
    src: &SourceTerm,
) -> Result<DecayReport> {
    if !consts.hypotheses.inhom {
        return Err(Error::Inapplicable(
            "nu does not exceed the inhomogeneous threshold".into(),
        ));
    }
    let (b, c) = consts
        .b
        .zip(consts.c_big)
        .ok_or_else(|| Error::Inapplicable("no inhomogeneous rate constants".into()))?;
    let grid = *record.steady.u_infinity.grid();
    let f_inf = match src.limit(&grid)? {
        Some(f) => f,
        None if src.is_time_independent() => src.initial(&grid)?,
        None => {
            return Err(Error::Inapplicable(
                "source declares no long-time limit".into(),
            ))
        }
    };
    let times = record.times();
    let errors: Vec<f64> = record
        .diagnostics
        .iter()
        .map(|d| d.h1_error_inverse)
        .collect();
    let e0 = errors.first().copied().unwrap_or(0.0);

    let mut series = Vec::with_capacity(times.len());
    // j = e^(-Bt) int_0^t g(s) e^(Bs) ds
    let mut j = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (&t, &observed) in times.iter().zip(&errors) {
        let f = src.evaluate(&grid, t)?;
        let g = l2_norm(&f.zip_map(&f_inf, |a, b| a - b)?).powi(2);
        if let Some((t_prev, g_prev)) = prev {
            let h = t - t_prev;
            let decay = (-b * h).exp();
            j = decay * j + 0.5 * h * (g_prev * decay + g);
        }
        prev = Some((t, g));
        series.push(EnvelopePoint {
            t,
            bound: (-b * t).exp() * e0 + c * j,
            observed,
        });
    }
    Ok(report(
        &times,
        &errors,
        series,
        b,
        DEFAULT_FLOOR,
        DEFAULT_TOLERANCE,
    ))
}

/// Fits the decay of `||u - u_inf||_H1`. Passes when the fitted rate is at
/// least `(1 - tol)` times the theory rate, or when the error never rises
/// above `noise_floor` (nothing to decay).
pub fn check_direct_convergence(
    record: &SimulationRecord,
    theory_rate: f64,
    noise_floor: f64,
) -> DecayReport {
    let times = record.times();
    let errors: Vec<f64> = record
        .diagnostics
        .iter()
        .map(|d| d.h1_error_direct)
        .collect();
    let mut rep = report(
        &times,
        &errors,
        Vec::new(),
        theory_rate,
        DEFAULT_FLOOR,
        DEFAULT_TOLERANCE,
    );
    let max_err = errors.iter().copied().fold(0.0, f64::max);
    rep.envelope_ok = match rep.fitted_rate {
        _ if max_err <= noise_floor => true,
        Some(rate) => rate >= (1.0 - DEFAULT_TOLERANCE) * theory_rate,
        None => false,
    };
    rep.envelope_margin = rep.fitted_rate.map_or(0.0, |r| theory_rate / r);
    rep
}
