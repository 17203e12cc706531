//! Experiment drivers for the smoothed CFIE solver: scenario files, single
//! solves, convergence and separation sweeps, near-field grids and the
//! self-test suites. Results are written as plain CSV.

pub mod config;
pub mod drivers;
pub mod output;
pub mod selftest;

pub use config::{Overrides, Scenario};
pub use drivers::{run_convergence, run_nearfield, run_separation_sweep, run_solve};
pub use selftest::{run_selftest, SelftestOptions};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] scfie_core::Error),
    #[error("GMRES stopped after {iterations} iterations at relative residual {residual:.3e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("i/o error on {path}: {source}")]
    Io { path: std::path::PathBuf, source: std::io::Error },
}

impl Error {
    /// 1 for bad input, 2 for solver or file failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Core(scfie_core::Error::InvalidInput(_)) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
