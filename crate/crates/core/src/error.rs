use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not symmetric: |V[{row},{col}] - V[{col},{row}]| = {deviation:e}")]
    NotSymmetric {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("non-physical covariance: symplectic eigenvalue {eigenvalue:.3e} below 1/2 (tolerance {tolerance:e})")]
    NonPhysical { eigenvalue: f64, tolerance: f64 },

    #[error("physicality lost during integration at step {step} (t = {time:e}): symplectic eigenvalue {eigenvalue:.3e}")]
    PhysicalityLost {
        step: usize,
        time: f64,
        eigenvalue: f64,
    },

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    #[error("unstable dynamics: {0}")]
    Unstable(String),

    #[error("config error at line {line}, key `{key}`: {reason}")]
    Config {
        key: String,
        line: usize,
        reason: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, line: usize, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            line,
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidParameter { .. } => 2,
            Error::Unstable(_) => 4,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}
