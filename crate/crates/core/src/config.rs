//! `key = value` run configuration. Blank lines and `#` comments are ignored;
//! relative paths resolve against the directory of the config file.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::constants::TheoremMode;
use crate::decay::DEFAULT_FLOOR;
use crate::error::{Error, Result};
use crate::grid::{trapezoid_integral, Field, Grid};
use crate::lagrangian::{initial_map, source_from_sheet, LagrangianMap};
use crate::solver::{
    SimulationConfig, DEFAULT_DT, DEFAULT_NEWTON_MAX_ITER, DEFAULT_NEWTON_TOL,
    DEFAULT_POSITIVITY_FLOOR, DEFAULT_SNAPSHOT_STRIDE,
};
use crate::source::{AnalyticFamily, SourceTerm, TabulatedSource, DEFAULT_DT_QUAD, DEFAULT_T_CUT};

const KNOWN_KEYS: &[&str] = &[
    "nu",
    "n",
    "dt",
    "t_end",
    "snapshot_stride",
    "newton_tol",
    "newton_max_iter",
    "positivity_floor",
    "u0",
    "source",
    "mode",
    "t_cut",
    "dt_quad",
    "floor",
    "h0",
    "v0",
    "M",
];

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
    base_dir: PathBuf,
}

/// Thin-sheet initial data.
#[derive(Debug, Clone)]
pub struct SheetData {
    pub h0: Field,
    pub v0: Field,
    pub mass: f64,
    pub map: LagrangianMap,
    pub f0: Field,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = k.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Config(format!(
                    "line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            if entries
                .insert(key.to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(Error::Config(format!("duplicate key `{key}`")));
            }
        }
        Ok(Self {
            entries,
            base_dir: PathBuf::new(),
        })
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.entries
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::MissingKey(key.to_string()))
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.raw(key)?;
        v.parse()
            .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
    }

    fn number_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        if self.has(key) {
            self.number(key)
        } else {
            Ok(default)
        }
    }

    fn resolve(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn nu(&self) -> Result<f64> {
        let nu: f64 = self.number("nu")?;
        if !(nu > 0.0) {
            return Err(Error::Config(format!("`nu` must be positive, got {nu}")));
        }
        Ok(nu)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.number("n")?)
    }

    pub fn t_end(&self) -> Result<f64> {
        self.number("t_end")
    }

    pub fn dt(&self) -> Result<f64> {
        self.number_or("dt", DEFAULT_DT)
    }

    pub fn mode(&self) -> Result<TheoremMode> {
        TheoremMode::parse(self.raw("mode")?)
    }

    pub fn t_cut(&self) -> Result<f64> {
        self.number_or("t_cut", DEFAULT_T_CUT)
    }

    pub fn dt_quad(&self) -> Result<f64> {
        self.number_or("dt_quad", DEFAULT_DT_QUAD)
    }

    pub fn floor(&self) -> Result<f64> {
        self.number_or("floor", DEFAULT_FLOOR)
    }

    /// `source` is a family id with parameters, `table PATH`, or `sheet`
    /// (generated from `h0`, `v0`, `M`).
    pub fn source(&self, grid: &Grid) -> Result<SourceTerm> {
        let spec = self.raw("source")?;
        if let Some(path) = spec.strip_prefix("table ") {
            let tab = TabulatedSource::from_csv(&self.resolve(path.trim()))?;
            if tab.grid() != grid {
                return Err(Error::Config("table grid differs from `n`".into()));
            }
            return Ok(SourceTerm::Tabulated(tab));
        }
        if spec == "sheet" {
            return Ok(SourceTerm::Homogeneous(self.sheet(grid)?.f0));
        }
        Ok(SourceTerm::Analytic(AnalyticFamily::parse(spec)?))
    }

    /// `u0` is `uniform`, `inverse_sine EPS` (`1/(1 + EPS sin(pi x))`, unit
    /// mass), `csv PATH` (columns `x,u`) or `sheet` (`M / h0(y(x,0))`).
    pub fn u0(&self, grid: &Grid) -> Result<Field> {
        let spec = self.raw("u0")?;
        let mut parts = spec.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some("uniform"), None, None) => Ok(grid.constant(1.0)),
            (Some("inverse_sine"), Some(eps), None) => {
                let eps: f64 = eps
                    .parse()
                    .map_err(|_| Error::Config(format!("`u0`: bad amplitude `{eps}`")))?;
                if eps.abs() >= 1.0 {
                    return Err(Error::Config("`u0`: inverse_sine needs |EPS| < 1".into()));
                }
                let raw = grid.sample(|x| 1.0 / (1.0 + eps * (PI * x).sin()));
                let m = trapezoid_integral(&raw);
                Ok(raw.map(|v| v / m))
            }
            (Some("csv"), Some(_), _) => {
                let path = spec["csv".len()..].trim();
                read_profile(&self.resolve(path), grid)
            }
            (Some("sheet"), None, None) => Ok(self.sheet(grid)?.map.u),
            _ => Err(Error::Config(format!("unknown u0 profile `{spec}`"))),
        }
    }

    /// `h0` is `constant A` or `cosine MEAN AMP`; `v0` is `zero` or
    /// `sine AMP`; `M` defaults to the integral of `h0`.
    pub fn sheet(&self, grid: &Grid) -> Result<SheetData> {
        let h0 = parse_profile(self.raw("h0")?, grid, "h0")?;
        let v0 = parse_profile(self.raw("v0")?, grid, "v0")?;
        let vv = v0.values();
        if vv[0] != 0.0 || vv[vv.len() - 1] != 0.0 {
            return Err(Error::Config("`v0` must vanish at both ends".into()));
        }
        let mass = self.number_or("M", trapezoid_integral(&h0))?;
        let nu = self.nu()?;
        let map = initial_map(&h0, mass)?;
        let f0 = source_from_sheet(&h0, &v0, mass, nu)?;
        Ok(SheetData {
            h0,
            v0,
            mass,
            map,
            f0,
        })
    }

    pub fn simulation(&self) -> Result<SimulationConfig> {
        let grid = self.grid()?;
        let mut cfg = SimulationConfig::new(
            self.nu()?,
            self.u0(&grid)?,
            self.source(&grid)?,
            self.t_end()?,
        );
        cfg.dt = self.dt()?;
        cfg.snapshot_stride = self.number_or("snapshot_stride", DEFAULT_SNAPSHOT_STRIDE)?;
        cfg.newton_tol = self.number_or("newton_tol", DEFAULT_NEWTON_TOL)?;
        cfg.newton_max_iter = self.number_or("newton_max_iter", DEFAULT_NEWTON_MAX_ITER)?;
        cfg.positivity_floor = self.number_or("positivity_floor", DEFAULT_POSITIVITY_FLOOR)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_profile(spec: &str, grid: &Grid, key: &str) -> Result<Field> {
    let parts: Vec<&str> = spec.split_whitespace().collect();
    let nums: Vec<f64> = parts
        .iter()
        .skip(1)
        .map(|p| {
            p.parse()
                .map_err(|_| Error::Config(format!("`{key}`: bad number `{p}`")))
        })
        .collect::<Result<_>>()?;
    match (parts.first().copied(), nums.as_slice()) {
        (Some("zero"), []) => Ok(grid.zeros()),
        (Some("constant"), [a]) => Ok(grid.constant(*a)),
        (Some("cosine"), [mean, amp]) => Ok(grid.sample(|y| mean + amp * (PI * y).cos())),
        (Some("sine"), [amp]) => {
            let mut v = grid.sample(|y| amp * (PI * y).sin()).into_values();
            let n = v.len();
            v[n - 1] = 0.0;
            Field::new(*grid, v)
        }
        _ => Err(Error::Config(format!("unknown `{key}` profile `{spec}`"))),
    }
}

/// Reads an `x,u` profile and checks it sits on `grid`.
fn read_profile(path: &Path, grid: &Grid) -> Result<Field> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut xs = Vec::new();
    let mut us = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let get = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("{}: malformed row", path.display())))
        };
        xs.push(get(0)?);
        us.push(get(1)?);
    }
    if xs.len() != grid.n()
        || xs
            .iter()
            .enumerate()
            .any(|(i, &x)| (x - grid.x(i)).abs() > 1e-9)
    {
        return Err(Error::Config(format!(
            "{}: profile is not on the uniform grid of n = {}",
            path.display(),
            grid.n()
        )));
    }
    Field::new(*grid, us)
}
