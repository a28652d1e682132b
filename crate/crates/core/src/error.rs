use thiserror::Error;

/// Errors raised by model construction, calculators and the codec simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pmf ({what}): {detail}")]
    InvalidPmf { what: String, detail: String },

    #[error("marginal of {axis} differs across hypotheses at symbol {symbol}: deviation {deviation:.3e}")]
    MarginalMismatch {
        axis: char,
        symbol: usize,
        deviation: f64,
    },

    #[error("symbol {symbol} outside alphabet of size {size}")]
    SymbolOutOfAlphabet { symbol: usize, size: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("channel kind mismatch: {0}")]
    KindMismatch(&'static str),

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("too few trials: {trials} (minimum {min})")]
    TooFewTrials { trials: usize, min: usize },

    #[error("K_Y is singular or not positive-definite")]
    SingularKy,

    #[error("conditional covariance is not positive-definite (min eigenvalue {min_eigenvalue:.3e})")]
    NonPositiveResult { min_eigenvalue: f64 },

    #[error("matrix is not symmetric positive-definite: {0}")]
    NonSpd(&'static str),

    #[error("H1 covariance of (U, Y) is singular")]
    SingularSigmaBar,

    #[error("alphabet product {size} exceeds limit {limit}")]
    AlphabetTooLarge { size: usize, limit: usize },

    #[error("no grid point yields a feasible exponent")]
    AllInfeasible,

    #[error("codebook needs {required:.3e} codewords, cap is {cap}")]
    CodebookTooLarge { required: f64, cap: usize },

    #[error("inconsistent trial trace: {0}")]
    InconsistentTrace(&'static str),

    #[error("every blocklength observed zero Type-II errors")]
    AllZeroErrors,

    #[error("need at least {min} blocklengths, got {got}")]
    TooFewBlocklengths { min: usize, got: usize },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("model file: {0}")]
    ModelFile(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
