//! External forcing `f(x, t)` and the source functionals `P0`, `P(t)`,
//! `N(t)` and `N_infinity`.
//!
//! Every field handed out by [`SourceTerm::evaluate`] is projected onto the
//! discretely mean-zero subspace: nodal samples of an analytically mean-zero
//! function are not mean-zero under the trapezoid rule in general, and the
//! zero mean is what keeps the solver's mass exactly constant.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{antiderivative, l2_norm, trapezoid_integral, Field, Grid};

/// `g - int g`, so that the result integrates to zero.
pub fn project_mean_zero(g: &Field) -> Field {
    let mean = trapezoid_integral(g);
    g.map(|v| v - mean)
}

/// Closed-form forcings of the shape `a(t) cos(pi x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticFamily {
    Zero,
    /// `a cos(pi x)`
    CosineStatic {
        amplitude: f64,
    },
    /// `a min{1, 1/t} cos(pi x)`
    CosineDecay {
        amplitude: f64,
    },
    /// `a exp(-r t) cos(pi x)`
    ExpDecay {
        amplitude: f64,
        rate: f64,
    },
}

impl AnalyticFamily {
    /// Parses `zero`, `cosine_static A`, `cosine_decay [A]` or `exp_decay A R`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut parts = spec.split_whitespace();
        let id = parts.next().unwrap_or("");
        let params: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad source parameter `{p}` in `{spec}`")))
            })
            .collect::<Result<_>>()?;
        let family = match (id, params.as_slice()) {
            ("zero", []) => Self::Zero,
            ("cosine_static", [a]) => Self::CosineStatic { amplitude: *a },
            ("cosine_decay", []) => Self::CosineDecay { amplitude: 1.0 },
            ("cosine_decay", [a]) => Self::CosineDecay { amplitude: *a },
            ("exp_decay", [a, r]) if *r > 0.0 => Self::ExpDecay {
                amplitude: *a,
                rate: *r,
            },
            _ => return Err(Error::Config(format!("unknown source family `{spec}`"))),
        };
        Ok(family)
    }

    /// Time amplitude `a(t)`.
    pub fn amplitude(&self, t: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::CosineStatic { amplitude } => amplitude,
            Self::CosineDecay { amplitude } => amplitude * (1.0f64).min(1.0 / t),
            Self::ExpDecay { amplitude, rate } => amplitude * (-rate * t).exp(),
        }
    }

    /// `a'(t)`; at a kink the one-sided value is taken from the requested side.
    pub fn amplitude_rate(&self, t: f64, from_right: bool) -> f64 {
        match *self {
            Self::Zero | Self::CosineStatic { .. } => 0.0,
            Self::CosineDecay { amplitude } => {
                if t < 1.0 || (t == 1.0 && !from_right) {
                    0.0
                } else {
                    -amplitude / (t * t)
                }
            }
            Self::ExpDecay { amplitude, rate } => -amplitude * rate * (-rate * t).exp(),
        }
    }

    pub fn limit_amplitude(&self) -> f64 {
        match *self {
            Self::CosineStatic { amplitude } => amplitude,
            _ => 0.0,
        }
    }

    pub fn is_time_independent(&self) -> bool {
        matches!(self, Self::Zero | Self::CosineStatic { .. })
    }

    /// Times where `a'` jumps.
    pub fn breakpoints(&self) -> &'static [f64] {
        match self {
            Self::CosineDecay { .. } => &[1.0],
            _ => &[],
        }
    }

    /// `int_{t_cut}^inf |a'(t)| dt`.
    pub fn tail_rate_integral(&self, t_cut: f64) -> f64 {
        match *self {
            Self::Zero | Self::CosineStatic { .. } => 0.0,
            Self::CosineDecay { amplitude } => amplitude.abs() / t_cut.max(1.0),
            Self::ExpDecay { amplitude, rate } => amplitude.abs() * (-rate * t_cut).exp(),
        }
    }

    pub fn spatial(x: f64) -> f64 {
        (std::f64::consts::PI * x).cos()
    }
}

type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Forcing given by an arbitrary closure, e.g. a manufactured-solution defect.
#[derive(Clone)]
pub struct FunctionSource {
    label: String,
    f: SpaceTimeFn,
    limit: Option<SpaceFn>,
}

impl FunctionSource {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
            limit: None,
        }
    }

    pub fn with_limit(mut self, limit: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.limit = Some(Arc::new(limit));
        self
    }
}

impl fmt::Debug for FunctionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSource")
            .field("label", &self.label)
            .field("has_limit", &self.limit.is_some())
            .finish()
    }
}

/// Time-stamped forcing fields, linearly interpolated in time.
#[derive(Debug, Clone)]
pub struct TabulatedSource {
    times: Vec<f64>,
    fields: Vec<Field>,
}

impl TabulatedSource {
    pub fn new(times: Vec<f64>, fields: Vec<Field>) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::Config(
                "tabulated source needs one field per time stamp".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("tabulated time stamps must increase".into()));
        }
        let grid = *fields[0].grid();
        if fields.iter().any(|f| *f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { times, fields })
    }

    /// Reads rows `t,x,f` (with header), grouped by consecutive equal `t`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let mut groups: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("bad tabulated source row {:?}", rec)))
            };
            let (t, x, f) = (num(0)?, num(1)?, num(2)?);
            match groups.last_mut() {
                Some((gt, rows)) if *gt == t => rows.push((x, f)),
                _ => groups.push((t, vec![(x, f)])),
            }
        }
        let n = groups.first().map_or(0, |g| g.1.len());
        let grid = Grid::new(n)?;
        let mut times = Vec::with_capacity(groups.len());
        let mut fields = Vec::with_capacity(groups.len());
        for (t, rows) in groups {
            if rows.len() != n {
                return Err(Error::Config(format!(
                    "tabulated source: time {t} has {} rows, expected {n}",
                    rows.len()
                )));
            }
            if rows
                .iter()
                .enumerate()
                .any(|(i, (x, _))| (x - grid.x(i)).abs() > 1e-9)
            {
                return Err(Error::Config(format!(
                    "tabulated source: x column at time {t} is not the uniform grid"
                )));
            }
            times.push(t);
            fields.push(Field::new(grid, rows.into_iter().map(|r| r.1).collect())?);
        }
        Self::new(times, fields)
    }

    pub fn grid(&self) -> &Grid {
        self.fields[0].grid()
    }

    fn range(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    fn at(&self, t: f64) -> Result<Field> {
        let (start, end) = self.range();
        if t < start || t > end {
            return Err(Error::OutOfRange { t, start, end });
        }
        let k = self.times.partition_point(|&s| s <= t);
        if k == self.times.len() {
            return Ok(self.fields[k - 1].clone());
        }
        let k = k.max(1);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        self.fields[k - 1].zip_map(&self.fields[k], |a, b| (1.0 - w) * a + w * b)
    }
}

#[derive(Debug, Clone)]
pub enum SourceTerm {
    /// Time-independent `f0(x)`.
    Homogeneous(Field),
    Analytic(AnalyticFamily),
    Tabulated(TabulatedSource),
    Function(FunctionSource),
}

impl SourceTerm {
    pub fn zero() -> Self {
        Self::Analytic(AnalyticFamily::Zero)
    }

    fn check_grid(expected: &Grid, grid: &Grid) -> Result<()> {
        if expected != grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Mean-zero nodal samples of `f(., t)`.
    pub fn evaluate(&self, grid: &Grid, t: f64) -> Result<Field> {
        if t < 0.0 {
            return Err(Error::Domain(format!(
                "source evaluated at negative time {t}"
            )));
        }
        let raw = match self {
            Self::Homogeneous(f0) => {
                Self::check_grid(f0.grid(), grid)?;
                f0.clone()
            }
            Self::Analytic(fam) => {
                let a = fam.amplitude(t);
                grid.sample(|x| a * AnalyticFamily::spatial(x))
            }
            Self::Tabulated(tab) => {
                Self::check_grid(tab.grid(), grid)?;
                tab.at(t)?
            }
            Self::Function(fs) => grid.sample(|x| (fs.f)(x, t)),
        };
        Ok(project_mean_zero(&raw))
    }

    /// `f(., 0)`.
    pub fn initial(&self, grid: &Grid) -> Result<Field> {
        match self {
            Self::Tabulated(tab) => self.evaluate(grid, tab.range().0),
            _ => self.evaluate(grid, 0.0),
        }
    }

    /// Declared long-time limit `f_infinity`, if known.
    pub fn limit(&self, grid: &Grid) -> Result<Option<Field>> {
        Ok(match self {
            Self::Homogeneous(_) => Some(self.evaluate(grid, 0.0)?),
            Self::Analytic(fam) => {
                let a = fam.limit_amplitude();
                Some(project_mean_zero(
                    &grid.sample(|x| a * AnalyticFamily::spatial(x)),
                ))
            }
            Self::Tabulated(tab) => Some(self.evaluate(grid, tab.range().1)?),
            Self::Function(fs) => fs
                .limit
                .as_ref()
                .map(|l| project_mean_zero(&grid.sample(|x| l(x)))),
        })
    }

    pub fn is_time_independent(&self) -> bool {
        match self {
            Self::Homogeneous(_) => true,
            Self::Analytic(fam) => fam.is_time_independent(),
            Self::Tabulated(tab) => tab.times.len() == 1,
            Self::Function(_) => false,
        }
    }

    /// `f_t(., t)`, one-sided at kinks.
    fn time_derivative(&self, grid: &Grid, t: f64, from_right: bool) -> Result<Field> {
        match self {
            Self::Homogeneous(_) => Ok(grid.zeros()),
            Self::Analytic(fam) => {
                let r = fam.amplitude_rate(t, from_right);
                Ok(project_mean_zero(
                    &grid.sample(|x| r * AnalyticFamily::spatial(x)),
                ))
            }
            Self::Tabulated(_) => Err(Error::Unsupported(
                "pointwise time derivative of a tabulated source".into(),
            )),
            Self::Function(fs) => {
                let h = 1e-6 * t.abs().max(1.0);
                let lo = (t - h).max(0.0);
                let hi = t + h;
                let g = grid.sample(|x| ((fs.f)(x, hi) - (fs.f)(x, lo)) / (hi - lo));
                Ok(project_mean_zero(&g))
            }
        }
    }

    /// `|| int_0^x f_t(s, t) ds ||_2`.
    fn rate_norm(&self, grid: &Grid, t: f64, from_right: bool) -> Result<f64> {
        Ok(l2_norm(&antiderivative(
            &self.time_derivative(grid, t, from_right)?,
        )))
    }

    /// `int_a^b rate_norm dt` by composite trapezoid, split at kinks.
    fn integrate_rate_norm(&self, grid: &Grid, a: f64, b: f64, dt_quad: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        if let Self::Tabulated(tab) = self {
            return tab.integrate_rate_norm(a, b);
        }
        let mut cuts = vec![a];
        if let Self::Analytic(fam) = self {
            cuts.extend(
                fam.breakpoints()
                    .iter()
                    .copied()
                    .filter(|&k| k > a && k < b),
            );
        }
        cuts.push(b);
        let mut total = 0.0;
        for seg in cuts.windows(2) {
            let (s0, s1) = (seg[0], seg[1]);
            let m = ((s1 - s0) / dt_quad).ceil().max(1.0) as usize;
            let h = (s1 - s0) / m as f64;
            let mut acc =
                0.5 * (self.rate_norm(grid, s0, true)? + self.rate_norm(grid, s1, false)?);
            for k in 1..m {
                acc += self.rate_norm(grid, s0 + k as f64 * h, true)?;
            }
            total += h * acc;
        }
        Ok(total)
    }
}

impl TabulatedSource {
    /// Piecewise-linear in time, so each segment contributes exactly
    /// `|| int_0^x (f_{k+1} - f_k) ||_2` times the covered fraction.
    fn integrate_rate_norm(&self, a: f64, b: f64) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::Unsupported(
                "tabulated source with a single time stamp has no time resolution".into(),
            ));
        }
        let mut total = 0.0;
        for k in 0..self.times.len() - 1 {
            let (t0, t1) = (self.times[k], self.times[k + 1]);
            let lo = a.max(t0);
            let hi = b.min(t1);
            if hi <= lo {
                continue;
            }
            let diff = self.fields[k + 1].zip_map(&self.fields[k], |p, q| p - q)?;
            let jump = l2_norm(&antiderivative(&project_mean_zero(&diff)));
            total += jump * (hi - lo) / (t1 - t0);
        }
        Ok(total)
    }
}

/// `P(t) = || int_0^x f(s, t) ds ||_2`.
pub fn compute_p(src: &SourceTerm, grid: &Grid, t: f64) -> Result<f64> {
    Ok(l2_norm(&antiderivative(&src.evaluate(grid, t)?)))
}

/// `P0 = || int_0^x f0(s) ds ||_2`.
pub fn compute_p0(src: &SourceTerm, grid: &Grid) -> Result<f64> {
    Ok(l2_norm(&antiderivative(&src.initial(grid)?)))
}

/// `N(t) = int_0^t || int_0^x f_t ||_2 dt'` (no tail).
pub fn compute_n(src: &SourceTerm, grid: &Grid, t: f64, dt_quad: f64) -> Result<f64> {
    if src.is_time_independent() {
        return Ok(0.0);
    }
    let start = match src {
        SourceTerm::Tabulated(tab) => tab.range().0,
        _ => 0.0,
    };
    src.integrate_rate_norm(grid, start, t, dt_quad)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NInfinity {
    pub value: f64,
    /// Closed-form contribution of `[t_cut, inf)`, when one exists.
    pub tail: Option<f64>,
    /// True when the quadrature stops at `t_cut` without a tail.
    pub truncated: bool,
}

pub const DEFAULT_T_CUT: f64 = 100.0;
pub const DEFAULT_DT_QUAD: f64 = 1e-2;

/// `N_infinity = int_0^inf || int_0^x f_t(s, t) ds ||_2 dt`.
pub fn compute_n_infinity(
    src: &SourceTerm,
    grid: &Grid,
    t_cut: f64,
    dt_quad: f64,
) -> Result<NInfinity> {
    if t_cut <= 0.0 || dt_quad <= 0.0 {
        return Err(Error::Config("t_cut and dt_quad must be positive".into()));
    }
    if src.is_time_independent() {
        if let SourceTerm::Tabulated(_) = src {
            return Err(Error::Unsupported(
                "tabulated source with a single time stamp has no time resolution".into(),
            ));
        }
        return Ok(NInfinity {
            value: 0.0,
            tail: Some(0.0),
            truncated: false,
        });
    }
    match src {
        SourceTerm::Analytic(fam) => {
            let body = src.integrate_rate_norm(grid, 0.0, t_cut, dt_quad)?;
            let spatial = l2_norm(&antiderivative(&project_mean_zero(
                &grid.sample(AnalyticFamily::spatial),
            )));
            let tail = fam.tail_rate_integral(t_cut) * spatial;
            Ok(NInfinity {
                value: body + tail,
                tail: Some(tail),
                truncated: false,
            })
        }
        SourceTerm::Tabulated(tab) => {
            let (start, end) = tab.range();
            let value = tab.integrate_rate_norm(start, end.min(t_cut))?;
            Ok(NInfinity {
                value,
                tail: None,
                truncated: t_cut < end,
            })
        }
        _ => Ok(NInfinity {
            value: src.integrate_rate_norm(grid, 0.0, t_cut, dt_quad)?,
            tail: None,
            truncated: true,
        }),
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SourceFunctionals {
    pub p0: f64,
    pub n_infinity: f64,
    pub p_of_t: Vec<(f64, f64)>,
    pub n_of_t: Vec<(f64, f64)>,
}

pub fn source_functionals(
    src: &SourceTerm,
    grid: &Grid,
    times: &[f64],
    t_cut: f64,
    dt_quad: f64,
) -> Result<SourceFunctionals> {
    let p0 = compute_p0(src, grid)?;
    let n_infinity = compute_n_infinity(src, grid, t_cut, dt_quad)?.value;
    let mut p_of_t = Vec::with_capacity(times.len());
    let mut n_of_t = Vec::with_capacity(times.len());
    for &t in times {
        p_of_t.push((t, compute_p(src, grid, t)?));
        n_of_t.push((t, compute_n(src, grid, t, dt_quad)?));
    }
    Ok(SourceFunctionals {
        p0,
        n_infinity,
        p_of_t,
        n_of_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    /// `|| int_0^x cos(pi s) ds ||_2 = || sin(pi x) / pi ||_2`.
    const COS_PRIMITIVE_L2: f64 = FRAC_1_SQRT_2 / PI;

    #[test]
    fn evaluate_examples() {
        let g = Grid::new(201).unwrap();
        let src = SourceTerm::Analytic(AnalyticFamily::CosineStatic {
            amplitude: PI / 2.0,
        });
        let expect = g.sample(|x| PI / 2.0 * (PI * x).cos());
        for t in [0.0, 3.0, 100.0] {
            assert!(src.evaluate(&g, t).unwrap().max_abs_diff(&expect).unwrap() < 1e-14);
        }
        let decay = SourceTerm::Analytic(AnalyticFamily::CosineDecay { amplitude: 1.0 });
        let f4 = decay.evaluate(&g, 4.0).unwrap();
        assert!(
            f4.max_abs_diff(&g.sample(|x| 0.25 * (PI * x).cos()))
                .unwrap()
                < 1e-14
        );
        assert_eq!(SourceTerm::zero().evaluate(&g, 7.0).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn evaluated_fields_are_mean_zero() {
        let g = Grid::new(37).unwrap();
        let lopsided =
            SourceTerm::Function(FunctionSource::new("x^3", |x, t| x * x * x * (1.0 + t)));
        for t in [0.0, 0.5, 2.0] {
            assert!(trapezoid_integral(&lopsided.evaluate(&g, t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_examples() {
        let g = Grid::new(1001).unwrap();
        assert!(project_mean_zero(&g.constant(5.0)).max_abs() < 1e-13);
        let c = g.sample(|x| (PI * x).cos());
        assert!(project_mean_zero(&c).max_abs_diff(&c).unwrap() <= 1e-6);
        let p = project_mean_zero(&g.sample(|x| x));
        assert!(p.max_abs_diff(&g.sample(|x| x - 0.5)).unwrap() < 1e-14);
        assert!(trapezoid_integral(&p).abs() < 1e-15);
    }

    #[test]
    fn p0_examples() {
        let g = Grid::new(2001).unwrap();
        let ex24 = SourceTerm::Analytic(AnalyticFamily::CosineStatic {
            amplitude: PI / 2.0,
        });
        assert!((compute_p0(&ex24, &g).unwrap() - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-5);
        // the primitive of cos(pi x) is sin(pi x)/pi, whose L2 norm is 1/(pi sqrt 2)
        let cos = SourceTerm::Analytic(AnalyticFamily::CosineDecay { amplitude: 1.0 });
        assert!((compute_p0(&cos, &g).unwrap() - COS_PRIMITIVE_L2).abs() < 1e-5);
        assert_eq!(compute_p0(&SourceTerm::zero(), &g).unwrap(), 0.0);
    }

    #[test]
    fn n_infinity_examples() {
        let g = Grid::new(401).unwrap();
        let hom = SourceTerm::Homogeneous(g.sample(|x| (PI * x).cos()));
        let n = compute_n_infinity(&hom, &g, DEFAULT_T_CUT, DEFAULT_DT_QUAD).unwrap();
        assert_eq!(n.value, 0.0);

        let decay = SourceTerm::Analytic(AnalyticFamily::CosineDecay { amplitude: 1.0 });
        let n = compute_n_infinity(&decay, &g, DEFAULT_T_CUT, DEFAULT_DT_QUAD).unwrap();
        assert!((n.value - COS_PRIMITIVE_L2).abs() < 1e-4, "{n:?}");
        assert!(!n.truncated);

        let exp = SourceTerm::Analytic(AnalyticFamily::ExpDecay {
            amplitude: 1.0,
            rate: 1.0,
        });
        let n = compute_n_infinity(&exp, &g, DEFAULT_T_CUT, DEFAULT_DT_QUAD).unwrap();
        assert!((n.value - COS_PRIMITIVE_L2).abs() < 1e-4, "{n:?}");
    }

    #[test]
    fn n_infinity_without_tail_is_flagged() {
        let g = Grid::new(101).unwrap();
        let fs = SourceTerm::Function(FunctionSource::new("exp", |x, t| {
            (-t).exp() * (PI * x).cos()
        }));
        let n = compute_n_infinity(&fs, &g, 30.0, 1e-2).unwrap();
        assert!(n.truncated);
        assert!((n.value - COS_PRIMITIVE_L2).abs() < 1e-4);
    }

    #[test]
    fn tabulated_source() {
        let g = Grid::new(11).unwrap();
        let f0 = g.sample(|x| (PI * x).cos());
        let f1 = f0.map(|v| 0.5 * v);
        let tab = SourceTerm::Tabulated(
            TabulatedSource::new(vec![0.0, 2.0], vec![f0.clone(), f1]).unwrap(),
        );
        let mid = tab.evaluate(&g, 1.0).unwrap();
        assert!(mid.max_abs_diff(&f0.map(|v| 0.75 * v)).unwrap() < 1e-14);
        assert!(matches!(
            tab.evaluate(&g, 2.5),
            Err(Error::OutOfRange { .. })
        ));
        let n = compute_n_infinity(&tab, &g, 100.0, 1e-2).unwrap();
        let expect = 0.5 * l2_norm(&antiderivative(&project_mean_zero(&f0)));
        assert!((n.value - expect).abs() < 1e-14);

        let single = SourceTerm::Tabulated(TabulatedSource::new(vec![0.0], vec![f0]).unwrap());
        assert!(matches!(
            compute_n_infinity(&single, &g, 100.0, 1e-2),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn tabulated_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let mut text = String::from("t,x,f\n");
        for t in [0.0, 1.0] {
            for i in 0..5 {
                let x = i as f64 / 4.0;
                text.push_str(&format!("{t},{x},{}\n", (1.0 - t) * (PI * x).cos()));
            }
        }
        std::fs::write(&path, text).unwrap();
        let tab = TabulatedSource::from_csv(&path).unwrap();
        assert_eq!(tab.grid().n(), 5);
        assert_eq!(tab.times, vec![0.0, 1.0]);
    }

    #[test]
    fn p_bounded_by_n_plus_p0() {
        let g = Grid::new(201).unwrap();
        for src in [
            SourceTerm::Analytic(AnalyticFamily::CosineDecay { amplitude: 1.0 }),
            SourceTerm::Analytic(AnalyticFamily::ExpDecay {
                amplitude: 2.0,
                rate: 0.5,
            }),
            SourceTerm::Analytic(AnalyticFamily::CosineStatic { amplitude: 1.0 }),
        ] {
            let times: Vec<f64> = (0..40).map(|k| 0.25 * k as f64).collect();
            let sf = source_functionals(&src, &g, &times, DEFAULT_T_CUT, DEFAULT_DT_QUAD).unwrap();
            for (&(_, p), w) in sf.p_of_t.iter().zip(sf.n_of_t.windows(2)) {
                assert!(p <= sf.n_infinity + sf.p0 + 1e-12);
                assert!(w[1].1 >= w[0].1);
            }
        }
    }

    #[test]
    fn parse_families() {
        assert_eq!(
            AnalyticFamily::parse("cosine_static 1.5").unwrap(),
            AnalyticFamily::CosineStatic { amplitude: 1.5 }
        );
        assert_eq!(
            AnalyticFamily::parse("cosine_decay").unwrap(),
            AnalyticFamily::CosineDecay { amplitude: 1.0 }
        );
        assert!(AnalyticFamily::parse("sawtooth 3").is_err());
        assert!(AnalyticFamily::parse("exp_decay 1").is_err());
    }
}
