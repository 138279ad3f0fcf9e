use thiserror::Error;

/// Errors raised by the block solver toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("block ({row},{col}) is not Hermitian (relative defect {defect:.3e})")]
    NonHermitian { row: usize, col: usize, defect: f64 },

    #[error("matrix is not in D: {0}")]
    NotInD(String),

    #[error("matrix is not in Z-hat: {0}")]
    NotInZhat(String),

    #[error("certificate vector must be strictly positive (entry {index} = {value})")]
    NotPositiveVector { index: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("splitting matrix M_{index} is singular")]
    SingularM { index: usize },

    #[error("block diagonal part is singular at block {block}")]
    SingularD { block: usize },

    #[error("weights for block row {row} sum to {sum}, expected 1")]
    WeightSum { row: usize, sum: f64 },

    #[error("invalid parameters: {0}")]
    BadParams(String),

    #[error("extrapolation parameter must be positive, got {0}")]
    BadTau(f64),

    #[error("stopping rule is invalid: {0}")]
    BadStopRule(String),

    #[error("eigenvalue iteration did not converge")]
    EigFailure,

    #[error("need at least {needed} recorded norms, got {got}")]
    TooFewIterations { needed: usize, got: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
