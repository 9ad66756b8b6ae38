use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by graph construction, diffusion and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex index {index} out of range for {n} vertices")]
    VertexOutOfRange { index: usize, n: usize },

    #[error("hb-edge index {index} out of range for {p} hb-edges")]
    EdgeOutOfRange { index: usize, p: usize },

    #[error("invalid hb-graph: {0}")]
    Validation(String),

    #[error("hb-graph is not connected: {0}")]
    Disconnected(String),

    #[error("invalid bias specification `{0}` (expected id, pow:<alpha> or exp:<alpha>)")]
    BiasSyntax(String),

    #[error("numerical failure at step {step}: {what}")]
    Numerical { step: usize, what: String },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("rankings cover different entity sets ({left} vs {right} entities)")]
    RankingMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("generator: {0}")]
    Generation(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("experiment {experiment} on graph seed {seed}: {source}")]
    Experiment {
        seed: u64,
        experiment: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Coarse error category, used for CLI exit codes and FFI status codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::VertexOutOfRange { .. }
            | Error::EdgeOutOfRange { .. }
            | Error::InvalidArgument(_)
            | Error::BiasSyntax(_)
            | Error::RankingMismatch { .. } => ErrorCategory::InvalidInput,
            Error::Validation(_) | Error::Disconnected(_) => ErrorCategory::Structure,
            Error::Numerical { .. } | Error::NoConvergence { .. } => ErrorCategory::Numerical,
            Error::Generation(_) => ErrorCategory::Generation,
            Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => ErrorCategory::Parse,
            Error::Io(_) => ErrorCategory::Io,
            Error::Experiment { source, .. } => source.category(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    InvalidInput,
    Structure,
    Numerical,
    Generation,
    Parse,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::InvalidInput => 2,
            ErrorCategory::Structure => 3,
            ErrorCategory::Numerical => 4,
            ErrorCategory::Generation => 5,
            ErrorCategory::Parse => 6,
            ErrorCategory::Io => 7,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorCategory::InvalidInput => "invalid-input",
            ErrorCategory::Structure => "structure",
            ErrorCategory::Numerical => "numerical",
            ErrorCategory::Generation => "generation",
            ErrorCategory::Parse => "parse",
            ErrorCategory::Io => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
