use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("evaluation failed at t = {t}: {what}")]
    Evaluation { t: f64, what: String },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    /// Newton iteration ran out of iterations. Carries the best iterate seen.
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("singular linear system (zero pivot in column {column})")]
    Singular { column: usize },

    #[error("step {step} at t = {t} failed: {source}")]
    Step {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("convergence level {level} failed: {source}")]
    Study {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors raised by the nonlinear or linear solvers.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::NonConvergence { .. } | Error::Singular { .. } => true,
            Error::Step { source, .. } | Error::Study { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }

    /// Process exit code used by the command-line runner: 2 for rejected
    /// input, 3 for numerical failure, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_)
            | Error::Construction(_)
            | Error::Configuration(_)
            | Error::Parse { .. }
            | Error::Validation { .. } => 2,
            Error::Io { .. } => 1,
            Error::Step { source, .. } | Error::Study { source, .. } => match source.exit_code() {
                2 => 2,
                1 => 1,
                _ => 3,
            },
            Error::NonConvergence { .. } | Error::Singular { .. } | Error::Evaluation { .. } => 3,
        }
    }
}
