use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid robot model: {0}")]
    InvalidModel(String),

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("infeasible bounds at index {index}: lo {lo} > hi {hi}")]
    InfeasibleBounds { index: usize, lo: f64, hi: f64 },

    #[error("active-set solver did not converge after {0} iterations")]
    SolverDidNotConverge(usize),

    #[error("simulation fault at t = {t:.4} s: {message}")]
    SimulationFault { t: f64, message: String },

    #[error("trajectory parse error at line {line}: {message}")]
    TrajectoryParse { line: u64, message: String },

    #[error("trajectory validation error at line {line}: {message}")]
    TrajectoryValidation { line: u64, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::InvalidModel(_) => "invalid_model",
            Error::NotPositiveDefinite => "not_positive_definite",
            Error::InfeasibleBounds { .. } => "infeasible_bounds",
            Error::SolverDidNotConverge(_) => "solver_not_converged",
            Error::SimulationFault { .. } => "simulation_fault",
            Error::TrajectoryParse { .. } => "trajectory_parse",
            Error::TrajectoryValidation { .. } => "trajectory_validation",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Config(_) => "config",
            Error::MissingFile(_) => "missing_file",
            Error::Io(_) => "io",
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}

pub(crate) fn check_finite<'a>(
    what: &'static str,
    values: impl IntoIterator<Item = &'a f64>,
) -> Result<()> {
    if values.into_iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
