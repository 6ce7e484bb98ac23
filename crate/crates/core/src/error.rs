use thiserror::Error;

/// Errors raised by the estimation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// First harmonic vanishes, so the circular mean and Holevo variance are undefined.
    #[error("undefined moments: first trigonometric moment is zero")]
    UndefinedMoments,

    #[error("non-normalizable series: constant coefficient {c0} is not positive")]
    NonNormalizable { c0: f64 },

    #[error("log-domain error: inner product {value} of ledger entry {entry} is not positive")]
    LogDomain { entry: usize, value: f64 },

    #[error("enumeration too large: {rounds} rounds exceeds the limit of {max}")]
    EnumerationTooLarge { rounds: usize, max: usize },

    #[error("invalid likelihood mass {value}")]
    InvalidLikelihoodMass { value: f64 },

    #[error("update breakdown at iteration {iteration}: {reason}")]
    UpdateBreakdown { iteration: usize, reason: String },

    #[error("bisection bracket does not contain a root")]
    BracketFailure,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
