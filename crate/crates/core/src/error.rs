use thiserror::Error;

/// Errors raised by the algebra, chain, curvature and certification layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("numerical rank {got} differs from expected {expected} in {context}")]
    RankMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error("{context}: not closed under the bracket (residual {residual:e})")]
    NotClosed { context: String, residual: f64 },

    #[error("subspaces are not nested: {0}")]
    NotNested(String),

    #[error("not a Lie algebra homomorphism: {0}")]
    NotHomomorphism(String),

    #[error("t = {t} is outside the metric domain (eigenvalue {eigenvalue:e} of I - t*psi)")]
    Domain { t: f64, eigenvalue: f64 },

    #[error("invalid deformation: {0}")]
    InvalidDeformation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown chain key `{0}`")]
    UnknownChain(String),

    #[error("unknown part `{0}`")]
    UnknownPart(String),

    #[error("catalog entry `{key}` failed validation: {reason}")]
    Catalog { key: String, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
