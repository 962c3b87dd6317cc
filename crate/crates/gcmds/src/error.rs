use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Offending index triple or pair reported by metric validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub indices: Vec<usize>,
    pub reason: &'static str,
    pub excess: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {:?} (excess {:e})", self.reason, self.indices, self.excess)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("metric violation: {0}")]
    MetricViolation(Violation),

    #[error("invalid weights: {0}")]
    Weight(String),

    #[error("graph is disconnected: vertex {vertex} unreachable from vertex 0")]
    DisconnectedGraph { vertex: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("space is not two-point homogeneous: weighted row sums of d² spread by {spread:e}")]
    NotHomogeneous { spread: f64 },

    #[error(
        "eigensolver did not converge (iterations {iterations}, residual {residual:e}, norm {norm:e})"
    )]
    ConvergenceFailure { iterations: usize, residual: f64, norm: f64 },

    #[error("embedding dimension {k} exceeds the positive rank {pr}")]
    DimensionTooLarge { k: usize, pr: usize },

    #[error("rank bound {rank} exceeds the positive rank {pr}")]
    RankTooLarge { rank: usize, pr: usize },

    #[error("argument {t} outside [-1, 1]")]
    Domain { t: f64 },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("quadrature did not converge: last estimates {previous:e} and {last:e}")]
    NoConvergence { previous: f64, last: f64 },

    #[error("closed form requires odd order, got {n}")]
    Parity { n: usize },

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("marginal mismatch: {0}")]
    MarginalMismatch(String),

    #[error("{n} points exceed the enumeration cap of {cap}")]
    TooLargeToEnumerate { n: usize, cap: usize },

    #[error("spectrum does not have a one-dimensional kernel")]
    KernelAssumptionUnmet,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numeric failures as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::ConvergenceFailure { .. } | Error::NoConvergence { .. } | Error::Overflow(_)
        )
    }
}
