use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, PnpError>;

/// Coarse classification used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Io,
    Numerical,
}

#[derive(Debug, Error)]
pub enum PnpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("non-finite value in {what} at iteration {iteration}")]
    NonFinite { what: &'static str, iteration: usize },

    #[error("Sinkhorn balancing did not converge after {sweeps} sweeps (worst row residual {row_residual:.3e}, worst column residual {col_residual:.3e})")]
    SinkhornNonConvergence {
        sweeps: usize,
        row_residual: f64,
        col_residual: f64,
    },

    #[error("root bracketing failed at pixel {pixel}")]
    Bracketing { pixel: usize },

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<PnpError>,
    },
}

impl PnpError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            PnpError::Dimension(_) | PnpError::InvalidParameter(_) => ErrorKind::Config,
            PnpError::Io { .. } | PnpError::Format { .. } => ErrorKind::Io,
            PnpError::NonFinite { .. } | PnpError::SinkhornNonConvergence { .. } | PnpError::Bracketing { .. } => {
                ErrorKind::Numerical
            }
            PnpError::Iteration { source, .. } => source.kind(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        PnpError::InvalidParameter(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        PnpError::Dimension(msg.into())
    }
}
