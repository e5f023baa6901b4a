//! Command-line front end. Each subcommand writes CSV/JSON files plus a
//! `manifest.json` into `--out`.
//!
//! Exit codes: 0 success, 1 an asserted check failed, 2 hypotheses violated,
//! 3 solver failure, 4 configuration or input error.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::Config;
use crate::constants::{TheoremConstants, TheoremMode};
use crate::decay::{
    check_direct_convergence, check_homogeneous_envelope_with_rate, check_inhomogeneous_envelope,
    DecayReport, DEFAULT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::grid::{fmt_f64, write_columns_csv, Grid};
use crate::lagrangian::ssm::solve_ssm;
use crate::lagrangian::{crosscheck, limit_sheet, sheet_from_u, CrossCheck, SheetState};
use crate::reproduce::{
    run_example, steady_report, Example, ExampleError, ExampleOutcome, DEFAULT_N,
};
use crate::solver::{pde_rhs, simulate, SimulationFailure, SimulationRecord, DEFAULT_DT};
use crate::spline::CubicSpline;
use crate::steady::{steady_profile, Limit};

pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

/// Allowed relative height mismatch between the sheet solver and the
/// transformed u-solve.
pub const CROSSCHECK_TOL: f64 = 0.02;

#[derive(Debug, Parser)]
#[command(
    name = "singheat",
    version,
    about = "Singular heat equation lab: steady states, decay checks, thin-sheet transform"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// key = value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing)
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Number of grid nodes
    #[arg(long)]
    pub n: Option<usize>,
    /// Time step
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady state of the initial forcing
    Steady(CommonArgs),
    /// Theorem constants and admissibility
    Constants(CommonArgs),
    /// Time integration with decay checks
    Simulate(CommonArgs),
    /// Reproduce a worked example (ex-2-4 or ex-3-3)
    Example {
        name: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Source and initial profile generated by thin-sheet data
    Transform(CommonArgs),
    /// Compare the sheet solver with the transformed u-solve
    SsmCrosscheck(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Steady(_) => "steady",
            Self::Constants(_) => "constants",
            Self::Simulate(_) => "simulate",
            Self::Example { .. } => "example",
            Self::Transform(_) => "transform",
            Self::SsmCrosscheck(_) => "ssm-crosscheck",
        }
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Self::Steady(c)
            | Self::Constants(c)
            | Self::Simulate(c)
            | Self::Transform(c)
            | Self::SsmCrosscheck(c) => c,
            Self::Example { common, .. } => common,
        }
    }
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    config_path: Option<String>,
    output_dir: String,
    seedless: bool,
    passed: bool,
    files: &'a BTreeSet<String>,
}

/// Output directory that remembers what was written.
struct Outputs {
    dir: PathBuf,
    files: BTreeSet<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: BTreeSet::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.insert(name.to_string());
        self.dir.join(name)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

#[derive(Debug)]
pub enum Failure {
    Error(Error),
    Solver(SimulationFailure),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Error(e)
    }
}

impl From<ExampleError> for Failure {
    fn from(e: ExampleError) -> Self {
        match e {
            ExampleError::Setup(e) => Self::Error(e),
            ExampleError::Solver(f) => Self::Solver(f),
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::HypothesisViolated(_) | Error::Inapplicable(_) => EXIT_HYPOTHESIS,
        Error::NewtonDiverged { .. }
        | Error::Quenching { .. }
        | Error::CflFloor { .. }
        | Error::HeightPositivity { .. }
        | Error::NoRoot(_)
        | Error::SingularSteadyState(_)
        | Error::InsufficientSamples { .. } => EXIT_SOLVER,
        _ => EXIT_CONFIG,
    }
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let command = &cli.command;
    let common = command.common();
    let mut out = match Outputs::new(&common.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let result = match command {
        Command::Steady(c) => cmd_steady(c, &mut out),
        Command::Constants(c) => cmd_constants(c, &mut out),
        Command::Simulate(c) => cmd_simulate(c, &mut out),
        Command::Example { name, common } => cmd_example(name, common, &mut out),
        Command::Transform(c) => cmd_transform(c, &mut out),
        Command::SsmCrosscheck(c) => cmd_ssm_crosscheck(c, &mut out),
    };
    let (code, passed) = match result {
        Ok(true) => (0, true),
        Ok(false) => (EXIT_CHECK_FAILED, false),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            (exit_code(&e), false)
        }
        Err(Failure::Solver(f)) => {
            eprintln!("error: {f}");
            if let Some(partial) = &f.partial {
                if let Err(e) = partial.write_diagnostics_csv(&out.path("diagnostics.csv")) {
                    eprintln!("error: could not write partial diagnostics: {e}");
                }
            }
            (exit_code(&f.error), false)
        }
    };
    let manifest = RunManifest {
        command: command.name(),
        config_path: common.config.as_ref().map(|p| p.display().to_string()),
        output_dir: common.out.display().to_string(),
        seedless: true,
        passed,
        files: &out.files.clone(),
    };
    if let Err(e) = out.json("manifest.json", &manifest) {
        eprintln!("error: could not write manifest: {e}");
        return EXIT_CONFIG;
    }
    code
}

fn load_config(args: &CommonArgs) -> Result<Config> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("this command needs --config PATH".into()))?;
    let mut cfg = Config::load(path)?;
    if let Some(n) = args.n {
        cfg.set("n", n);
    }
    if let Some(dt) = args.dt {
        cfg.set("dt", dt);
    }
    if let Some(t) = args.t_end {
        cfg.set("t_end", t);
    }
    Ok(cfg)
}

fn cmd_steady(args: &CommonArgs, out: &mut Outputs) -> std::result::Result<bool, Failure> {
    let cfg = load_config(args)?;
    let grid = cfg.grid()?;
    let nu = cfg.nu()?;
    let src = cfg.source(&grid)?;
    let report = steady_report(&src, &grid, nu, Limit::Initial)?;
    let s = steady_profile(&src, &grid, nu, Limit::Initial)?;
    write_columns_csv(
        &out.path("steady.csv"),
        &["x", "u_infinity", "inverse"],
        &[&grid.nodes(), s.u_infinity.values(), s.inverse().values()],
    )?;
    out.json("steady.json", &report)?;
    if !src.is_time_independent() {
        if let Some(limit) = src.limit(&grid)? {
            let sl = crate::steady::steady_from_forcing(&limit, nu)?;
            out.json("steady_limit.json", &sl.report())?;
        }
    }
    Ok(true)
}

fn problem_mode(cfg: &Config, src_time_independent: bool) -> Result<TheoremMode> {
    if cfg.has("mode") {
        cfg.mode()
    } else if src_time_independent {
        Ok(TheoremMode::Homogeneous)
    } else {
        Ok(TheoremMode::Inhomogeneous)
    }
}

fn cmd_constants(args: &CommonArgs, out: &mut Outputs) -> std::result::Result<bool, Failure> {
    let cfg = load_config(args)?;
    let grid = cfg.grid()?;
    let src = cfg.source(&grid)?;
    let mode = problem_mode(&cfg, src.is_time_independent())?;
    let u0 = cfg.u0(&grid)?;
    let c =
        TheoremConstants::for_problem(&u0, &src, cfg.nu()?, mode, cfg.t_cut()?, cfg.dt_quad()?)?;
    out.json("constants.json", &c)?;
    if !c.admissible(mode) {
        return Err(Error::HypothesisViolated(format!(
            "convergence condition fails (R0 = {}, P0 = {}, N_infinity = {}, nu = {})",
            c.r0, c.p0, c.n_infinity, c.nu
        ))
        .into());
    }
    Ok(true)
}

fn write_record(record: &SimulationRecord, out: &mut Outputs) -> Result<()> {
    record.write_diagnostics_csv(&out.path("diagnostics.csv"))?;
    let mut wtr = csv::Writer::from_path(out.path("snapshots.csv"))?;
    wtr.write_record(["t", "x", "u", "u_t"])?;
    for s in &record.snapshots {
        let grid = s.u.grid();
        for i in 0..grid.n() {
            wtr.write_record([
                fmt_f64(s.t),
                fmt_f64(grid.x(i)),
                fmt_f64(s.u.values()[i]),
                fmt_f64(s.u_t.values()[i]),
            ])?;
        }
    }
    wtr.flush()?;
    out.json("steady.json", &record.steady.report())?;
    Ok(())
}

#[derive(Serialize)]
struct DecayOutput<'a> {
    envelope: Option<&'a DecayReport>,
    direct: &'a DecayReport,
}

fn cmd_simulate(args: &CommonArgs, out: &mut Outputs) -> std::result::Result<bool, Failure> {
    let cfg = load_config(args)?;
    let sim = cfg.simulation()?;
    let mode = problem_mode(&cfg, sim.source.is_time_independent())?;
    let consts = TheoremConstants::for_problem(
        &sim.u0,
        &sim.source,
        sim.nu,
        mode,
        cfg.t_cut()?,
        cfg.dt_quad()?,
    )?;
    let record = simulate(&sim).map_err(Failure::Solver)?;
    write_record(&record, out)?;
    let floor = cfg.floor()?;
    let envelope = match (mode, consts.admissible(mode)) {
        (TheoremMode::Homogeneous, true) => Some(check_homogeneous_envelope_with_rate(
            &record,
            consts.lambda_hom.unwrap_or(0.0),
            floor,
            DEFAULT_TOLERANCE,
        )),
        (TheoremMode::Inhomogeneous, true) => {
            Some(check_inhomogeneous_envelope(&record, &consts, &sim.source)?)
        }
        _ => None,
    };
    let theory = envelope.as_ref().map_or(0.0, |e| e.theory_rate);
    let dx = sim.grid.dx();
    let direct = check_direct_convergence(&record, theory, 10.0 * dx * dx);
    if let Some(e) = &envelope {
        e.write_envelope_csv(&out.path("envelope.csv"))?;
    }
    out.json("constants.json", &consts)?;
    out.json(
        "decay_report.json",
        &DecayOutput {
            envelope: envelope.as_ref(),
            direct: &direct,
        },
    )?;
    Ok(envelope.map_or(true, |e| e.envelope_ok))
}

fn write_example(outcome: &ExampleOutcome, out: &mut Outputs) -> Result<()> {
    write_record(&outcome.record, out)?;
    out.json("steady.json", &outcome.steady)?;
    out.json("constants.json", &outcome.constants)?;
    out.json(
        "decay_report.json",
        &DecayOutput {
            envelope: Some(&outcome.envelope),
            direct: &outcome.direct,
        },
    )?;
    outcome
        .envelope
        .write_envelope_csv(&out.path("envelope.csv"))?;
    out.json("checks.json", &outcome.checks)?;
    Ok(())
}

fn cmd_example(
    name: &str,
    args: &CommonArgs,
    out: &mut Outputs,
) -> std::result::Result<bool, Failure> {
    let ex = Example::parse(name)?;
    if args.config.is_some() {
        return Err(
            Error::Config("examples take no --config; use --n, --dt, --t-end".into()).into(),
        );
    }
    let outcome = run_example(
        ex,
        args.n.unwrap_or(DEFAULT_N),
        args.dt.unwrap_or(DEFAULT_DT),
        args.t_end.unwrap_or_else(|| ex.default_t_end()),
    )?;
    write_example(&outcome, out)?;
    for c in &outcome.checks {
        let tag = if c.passed { "ok" } else { "FAILED" };
        println!(
            "{:<20} {:>14.6e} (limit {:.6e}) {tag}",
            c.name, c.value, c.limit
        );
    }
    Ok(outcome.passed())
}

#[derive(Serialize)]
struct TransformReport {
    mass: f64,
    nu: f64,
    #[serde(rename = "C_nu")]
    c_nu: f64,
    /// `||h_inf(y_inf(.)) - h0(y(., 0))||_H1`
    h1_distance: f64,
    /// max over x of |v(y(x,0)) - v0(y(x,0))| from the reconstructed sheet
    v0_reconstruction_error: f64,
}

fn cmd_transform(args: &CommonArgs, out: &mut Outputs) -> std::result::Result<bool, Failure> {
    let cfg = load_config(args)?;
    let grid = cfg.grid()?;
    let nu = cfg.nu()?;
    let sheet = cfg.sheet(&grid)?;
    let m = sheet.mass;
    let u0 = &sheet.map.u;
    let steady = crate::steady::steady_from_forcing(&sheet.f0, nu)?;
    let lim = limit_sheet(&steady, m);
    let h_init = u0.map(|u| m / u);
    let dist = crate::grid::h1_norm(&lim.h.zip_map(&h_init, |a, b| a - b)?);

    let rebuilt = sheet_from_u(u0, &pde_rhs(u0, &sheet.f0, nu), m)?;
    let v0s = CubicSpline::from_field(&sheet.v0)?;
    let v_err = sheet
        .map
        .y_of_x
        .values()
        .iter()
        .zip(rebuilt.v.values())
        .fold(0.0, |e: f64, (&y, &v)| e.max((v - v0s.eval(y)).abs()));

    write_columns_csv(
        &out.path("map.csv"),
        &["x", "y", "u0", "f0"],
        &[
            &grid.nodes(),
            sheet.map.y_of_x.values(),
            u0.values(),
            sheet.f0.values(),
        ],
    )?;
    lim.write_csv(&out.path("limit_sheet.csv"))?;
    out.json(
        "transform.json",
        &TransformReport {
            mass: m,
            nu,
            c_nu: steady.c_nu,
            h1_distance: dist,
            v0_reconstruction_error: v_err,
        },
    )?;
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckReport {
    pub samples: Vec<CrossCheck>,
    /// max relative error of the final sheet height against `h_inf`
    pub ssm_limit_error: f64,
    /// same for `M / u` from the u-solve
    pub u_limit_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Runs both solvers from the same sheet data and compares heights at every
/// whole time unit.
pub fn ssm_crosscheck(
    cfg: &Config,
) -> std::result::Result<(CrosscheckReport, SheetState), Failure> {
    let grid: Grid = cfg.grid()?;
    let nu = cfg.nu()?;
    let sheet = cfg.sheet(&grid)?;
    let mut sim = crate::solver::SimulationConfig::new(
        nu,
        sheet.map.u.clone(),
        crate::source::SourceTerm::Homogeneous(sheet.f0.clone()),
        cfg.t_end()?,
    );
    sim.dt = cfg.dt()?;
    sim.snapshot_stride = ((1.0 / sim.dt).round() as usize).max(1);
    sim.validate()?;
    let record = simulate(&sim).map_err(Failure::Solver)?;

    let initial = SheetState::new(sheet.h0.clone(), sheet.v0.clone(), nu)?;
    let series =
        solve_ssm(&initial, sim.dt, sim.t_end, 1.0).map_err(|f| Failure::Error(f.error))?;

    let mut samples = Vec::new();
    for s in &series {
        if let Some(snap) = record.snapshots.iter().find(|p| (p.t - s.t).abs() < 1e-9) {
            let on_map = sheet_from_u(&snap.u, &snap.u_t, sheet.mass)?;
            samples.push(crosscheck(s.t, &s.state, &on_map)?);
        }
    }
    let lim = limit_sheet(&record.steady, sheet.mass);
    let last = series.last().expect("series has the initial state");
    let ssm_limit_error = crosscheck(last.t, &last.state, &lim)?.max_rel_error_h;
    let final_u = record.final_state().expect("record has snapshots");
    let u_limit_error = final_u
        .u
        .values()
        .iter()
        .zip(record.steady.u_infinity.values())
        .fold(0.0, |e: f64, (&u, &ui)| {
            e.max(((1.0 / u) - (1.0 / ui)).abs() * ui)
        });
    let passed = samples.iter().all(|c| c.max_rel_error_h <= CROSSCHECK_TOL);
    Ok((
        CrosscheckReport {
            samples,
            ssm_limit_error,
            u_limit_error,
            tolerance: CROSSCHECK_TOL,
            passed,
        },
        last.state.clone(),
    ))
}

fn cmd_ssm_crosscheck(args: &CommonArgs, out: &mut Outputs) -> std::result::Result<bool, Failure> {
    let cfg = load_config(args)?;
    let (report, last) = ssm_crosscheck(&cfg)?;
    last.write_csv(&out.path("ssm_final.csv"))?;
    out.json("crosscheck.json", &report)?;
    for c in &report.samples {
        println!(
            "t = {:>6.3}  max relative height error {:.4e}",
            c.t, c.max_rel_error_h
        );
    }
    Ok(report.passed)
}
