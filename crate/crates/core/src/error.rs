use thiserror::Error;

/// Errors raised by the library. The CLI maps them onto exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("signed nonlinearity needs integer exponents >= 2, got {0}")]
    Form(String),
    #[error("unknown data family `{0}`")]
    UnknownFamily(String),
    #[error("invalid custom data: {0}")]
    InvalidData(String),
    #[error("data has nonzero moment {0:e}; the Huygens check needs zero-mean data")]
    Moment(f64),
    #[error("point outside the domain: {0}")]
    Domain(String),
    #[error("grid too narrow: {0}")]
    Grid(String),
    #[error("non-finite value at t = {time}")]
    NonFinite { time: f64 },
    #[error("unknown inequality `{0}`")]
    UnknownInequality(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("data outside the certificate class: {0}")]
    DataClass(String),
    #[error("time {t} is at or past the comparison blow-up time {blowup}")]
    PastBlowup { t: f64, blowup: f64 },
    #[error("need at least 3 resolved blow-up records, got {0}")]
    TooFewPoints(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Failures of a computation on valid input, as opposed to bad input.
    pub fn is_runtime(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. } | Error::PastBlowup { .. } | Error::TooFewPoints(_)
        )
    }
}
