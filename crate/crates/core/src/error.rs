use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs at least 3 nodes, got {0}")]
    InvalidGrid(usize),

    #[error("field has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at node {0}")]
    NonFinite(usize),

    #[error("fields are sampled on different grids")]
    GridMismatch,

    #[error("time {t} is outside the tabulated range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("steady state is singular: denominator reaches {0:e}")]
    SingularSteadyState(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("newton failed to converge at t = {t} after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged {
        t: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("solution reached the positivity floor at t = {t}: min u = {min_u:e}")]
    Quenching { t: f64, min_u: f64 },

    #[error("inconsistent mass: initial map ends at y(1) = {0}")]
    InconsistentMass(f64),

    #[error("rate fit needs at least {needed} samples above the floor, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("check is inapplicable: {0}")]
    Inapplicable(String),

    #[error("CFL time step fell below {floor:e} at t = {t}")]
    CflFloor { t: f64, floor: f64 },

    #[error("sheet height lost positivity at t = {t}: min h = {min_h:e}")]
    HeightPositivity { t: f64, min_h: f64 },

    #[error("missing configuration key `{0}`")]
    MissingKey(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
