use std::io;

use thiserror::Error;

use crate::spectral::RadiusResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error(
        "eigensolver did not converge after {} matrix products (residual {:.3e}, rho {:.6})",
        .last.iterations, .last.residual, .last.rho
    )]
    NotConverged { last: Box<RadiusResult> },

    #[error("eigensolver failed at shaping iteration {iteration}: {source}")]
    Shaping {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code: 1 for domain/validation failures, 2 for I/O and input parsing.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Parse { .. } => 2,
            _ => 1,
        }
    }
}
