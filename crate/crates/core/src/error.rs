use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("ensemble not normalized: probabilities sum to {sum} (tolerance {tol})")]
    NotNormalized { sum: f64, tol: f64 },

    #[error("all probabilities are zero")]
    ZeroMass,

    #[error(
        "degenerate energy difference (dE = {de:e}) with non-zero entropy difference (dS = {ds:e})"
    )]
    DegenerateEnergy { de: f64, ds: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "degenerate Fermi level: single-particle levels {lower} and {upper} are split by {gap:e}"
    )]
    DegenerateFermiLevel {
        lower: usize,
        upper: usize,
        gap: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("grid too narrow: integrated mass {mass} < {required}")]
    GridTooNarrow { mass: f64, required: f64 },

    #[error("distribution not normalized: mass {mass}")]
    UnnormalizedDistribution { mass: f64 },

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("too few samples: {got} < {required}")]
    TooFewSamples { got: usize, required: usize },

    #[error("eigensolver did not converge for index {0}")]
    Eigensolver(usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
