use std::path::PathBuf;

use thiserror::Error;

/// Location of an interior cell, `(i, j)`; `j` is 0 in 1D.
pub type CellIndex = (usize, usize);

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("inadmissible state in cell {cell:?}: {reason}")]
    Admissibility { cell: CellIndex, reason: String },

    #[error(
        "positivity breach at {axis}-interface left of cell {cell:?}: \
         1/rho*_L = {inv_rho_left:e}, 1/rho*_R = {inv_rho_right:e} (relaxation parameter a = {a} too small?)"
    )]
    PositivityBreach {
        axis: char,
        cell: CellIndex,
        inv_rho_left: f64,
        inv_rho_right: f64,
        a: f64,
    },

    #[error("linear solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid value for `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SolverError {
    pub(crate) fn config(key: &str, message: impl Into<String>) -> Self {
        SolverError::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SolverError::Io {
            path: path.into(),
            source,
        }
    }

    /// Coarse category, used for the CLI exit code.
    pub fn exit_code(&self) -> i32 {
        match self {
            SolverError::Config { .. } | SolverError::Parse { .. } => 2,
            SolverError::Io { .. } => 3,
            SolverError::Admissibility { .. } | SolverError::PositivityBreach { .. } => 4,
            SolverError::NonConvergence { .. } => 5,
            SolverError::Domain(_) | SolverError::GridMismatch(_) => 6,
        }
    }
}

pub type Result<T> = std::result::Result<T, SolverError>;
