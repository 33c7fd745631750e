use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid value for `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// A configuration file could not be parsed.
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Poisson solve did not converge after {iterations} iterations (relative residual {residual:.3e}, target {tol:.3e})")]
    PoissonDiverged {
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    /// Non-positive or non-finite state encountered during time stepping.
    #[error("non-physical state in cell ({i}, {j}) at t = {time}: {reason}")]
    NonPhysical {
        i: usize,
        j: usize,
        time: f64,
        reason: String,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PoissonDiverged { .. } | Error::NonPhysical { .. }
        )
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            2
        } else {
            1
        }
    }
}
