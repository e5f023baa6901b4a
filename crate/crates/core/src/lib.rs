pub mod cli;
pub mod config;
pub mod constants;
pub mod decay;
pub mod error;
pub mod grid;
pub mod lagrangian;
pub mod reproduce;
pub mod solver;
pub mod source;
pub mod spline;
pub mod steady;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::{Field, Grid};
