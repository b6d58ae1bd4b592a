use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed value: out-of-range vertex index, self-loop, negative cost and so on.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// An exact solver was handed an instance above its enumeration bound.
    #[error("instance too large for exhaustive search: {what} is {actual}, limit {limit}")]
    SizeBound {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    /// An internal invariant (dual feasibility, cut axioms) does not hold.
    #[error("invariant breach: {0}")]
    Invariant(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
