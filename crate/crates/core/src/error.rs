use thiserror::Error;

/// Errors produced by the calibration library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("angle is not finite: {0}")]
    InvalidAngle(f64),

    #[error("DoA axes are nearly parallel (|sin| = {0:.3e})")]
    NearParallel(f64),

    #[error("problem is underdetermined: {0}")]
    Underdetermined(String),

    #[error("source trajectory is degenerate (all points coincide)")]
    DegenerateSource,

    #[error("alpha coefficient is zero")]
    ZeroAlpha,

    #[error("no consensus set found after {iterations} iterations")]
    NoConsensus { iterations: usize },

    #[error("event coincides with sensor {sensor} (distance {distance:.3e} m)")]
    CoincidentPoint { sensor: usize, distance: f64 },

    #[error("Hessian could not be regularized")]
    SingularHessian,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("sensor placement infeasible: {0}")]
    InfeasiblePlacement(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
