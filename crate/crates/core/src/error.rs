use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("q must satisfy 0 < q < 1, got {0}")]
    InvalidQ(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("enclosure endpoints out of order: lo = {lo}, hi = {hi}")]
    InvertedEnclosure { lo: String, hi: String },

    #[error("division by an interval containing zero")]
    DivisionByZeroInterval,

    #[error("(a; q)_inf requires 0 <= a < 1, got a = {0}")]
    PochhammerArgument(String),

    #[error("truncation depth {k_max} is below n + K = {required}")]
    TruncationTooShallow { k_max: usize, required: usize },

    #[error("continued fraction partial numerator s_{index} = {value} violates |s| <= 1/4")]
    NotWorpitzky { index: usize, value: String },

    #[error("index {k} is below the decay threshold K = {threshold}")]
    BelowThreshold { k: usize, threshold: usize },

    #[error("operation requires m != n")]
    EqualIndices,

    #[error("no tail bound available: {0}")]
    NoTailBound(String),

    #[error("operation requires the little q-Legendre family")]
    WrongFamily,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
