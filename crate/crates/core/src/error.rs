use thiserror::Error;

/// Errors raised by the certification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("symmetric eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point {0:?} lies outside the triangulated domain")]
    OutsideDomain(Vec<f64>),

    #[error("no simplex at {0:?} admits the orbit direction; the orbit leaves the domain")]
    OrbitLeavesDomain(Vec<f64>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trajectory blew up at t = {t}")]
    BlowUp { t: f64 },

    #[error("triangulation pair is not nested: {0}")]
    NotRefining(String),

    #[error("data does not match the triangulation: {0}")]
    Mismatch(String),

    #[error("LMI problem infeasible at mu = {mu}: block {block} has slack {slack:e}")]
    Infeasible { mu: f64, block: usize, slack: f64 },

    #[error("LMI feasibility inconclusive at mu = {mu} after {iterations} iterations")]
    Inconclusive { mu: f64, iterations: usize },

    #[error("LP solver hit its iteration cap ({0})")]
    LpIterationCap(usize),

    #[error("LP is unbounded")]
    LpUnbounded,

    #[error("LP is infeasible")]
    LpInfeasible,

    #[error("LP solver numerical failure: {0}")]
    LpNumerical(String),

    #[error("parse error in {what} at line {line}: {msg}")]
    Parse {
        what: &'static str,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
