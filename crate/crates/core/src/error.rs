use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator.
///
/// The variants fall into three families that the CLI maps onto distinct
/// exit codes: invalid input (geometry, sources, configuration), numerical
/// failure, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid array geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid source position [{x}, {y}, {z}]: {reason}")]
    InvalidSource {
        x: f64,
        y: f64,
        z: f64,
        reason: &'static str,
    },

    #[error(
        "source is {distance_m:.4e} m from antenna {antenna}, below the minimum of {min_m:.4e} m \
         (reactive near-field)"
    )]
    ReactiveNearField {
        antenna: usize,
        distance_m: f64,
        min_m: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero vector passed where a nonzero {0} is required")]
    ZeroVector(&'static str),

    #[error("solver failure: {reason} (condition estimate {condition_estimate:.3e})")]
    Solver {
        reason: String,
        condition_estimate: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot read config file {}: {source}", path.display())]
    ConfigFile {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

/// Coarse error class used to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numerical,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Solver { .. } => ErrorKind::Numerical,
            Error::Io { .. } | Error::Csv { .. } => ErrorKind::Io,
            _ => ErrorKind::Input,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
