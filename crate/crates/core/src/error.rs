use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index range [{from}, {to}] is empty or not supported by this base system")]
    BadRange { from: i64, to: i64 },

    #[error("phase {phase:?} does not belong to base system {base}")]
    PhaseMismatch { base: &'static str, phase: String },

    #[error("eigenvalue iteration did not converge for indices {unconverged:?}")]
    EigenNonConvergence { unconverged: Vec<usize> },

    #[error("matrix of size {n} exceeds the dense cap {cap}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("field has {count} non-converged nodes inside the window")]
    UnresolvedField { count: usize },

    #[error("tolerance {tol0} must exceed twice the field noise level {noise}")]
    ToleranceTooSmall { tol0: f64, noise: f64 },

    #[error("energy outside the admissible regime: {0}")]
    Regime(String),

    #[error("insufficient dynamic range: only {distances} usable distances")]
    InsufficientRange { distances: usize },

    #[error("potential is not real-valued on the real phase space")]
    NotRealValued,

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
