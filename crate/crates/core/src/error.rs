use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected} sites, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("site {site} is not on the unit sphere (|norm - 1| = {deviation:e})")]
    NotUnit { site: usize, deviation: f64 },

    #[error("state must contain at least {min} sites, got {found}")]
    TooFewSites { min: usize, found: usize },

    #[error("implicit solve did not converge after {iterations} iterations (residual {residual:e})")]
    ImplicitSolve { iterations: usize, residual: f64 },

    #[error("system does not provide {0}")]
    MissingCapability(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// The innermost error, looking through step wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures of the numerical method itself, as opposed to bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(self.root(), Error::ImplicitSolve { .. })
    }

    pub fn is_io(&self) -> bool {
        matches!(self.root(), Error::Io { .. } | Error::Csv { .. })
    }
}
