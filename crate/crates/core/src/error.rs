//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: ||A - A*||_F = {residual:.3e} exceeds {tol:.1e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("operators {i} and {j} do not commute: ||[H_i, H_j]||_F = {norm:.3e}")]
    NotCommuting { i: usize, j: usize, norm: f64 },

    #[error("eigensolver failed: {0}")]
    EigenFailure(String),

    #[error("joint diagonalization residual {residual:.3e} exceeds {tol:.1e} for operator {index}")]
    JointDiagonalization { index: usize, residual: f64, tol: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },

    #[error("pole {pole} lies on the spectrum")]
    PoleOnSpectrum { pole: String },

    #[error("pole {pole} must lie strictly off the real axis")]
    RealPole { pole: String },

    #[error("operation is not supported for the {0} class")]
    UnsupportedClass(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("path is not commuting at t = {t}: operators {i} and {j}, ||[H_i, H_j]||_F = {norm:.3e}")]
    NotPathCommuting { t: f64, i: usize, j: usize, norm: f64 },

    #[error("spectrum [{lo}, {hi}] is not contained in the box ({a}, {b})")]
    BoxTooSmall { lo: f64, hi: f64, a: f64, b: f64 },

    #[error("grid samples are not uniform: {0}")]
    NonUniformGrid(String),

    #[error("matrix is not dissipative: minimal eigenvalue of the imaginary part is {margin:.3e}")]
    NotDissipative { margin: f64 },

    #[error("path leaves the dissipative cone at t = {t} for operator {index}: margin {margin:.3e}")]
    PathLeavesDissipative { t: f64, index: usize, margin: f64 },

    #[error("Cayley transform has 1 in its spectrum (smallest singular value of I - T is {sigma:.3e})")]
    CayleyPole { sigma: f64 },

    #[error("rational function has a pole in the upper half-plane; dissipative calculus needs Im z < 0")]
    WrongHalfPlane,

    #[error("singular value sequence is not nonincreasing and nonnegative at position {0}")]
    NotMonotone(usize),

    #[error("psi is ill-conditioned: {0}")]
    IllConditionedPsi(String),

    #[error("singular linear system")]
    Singular,

    #[error("invalid instance specification: {0}")]
    InvalidSpec(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
