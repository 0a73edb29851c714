use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("observation {observation} at position {position} is impossible under the model")]
    DegenerateObservation { position: usize, observation: usize },

    #[error("transition matrix has no unique stationary distribution")]
    NonErgodicChain,

    #[error("codeword exhausted: no hypothesis is consistent with {n_bits} codeword bits")]
    DecodeExhausted { n_bits: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("no gamma up to 1.0 recovered the source (trial seed {seed})")]
    NoSuccess { seed: u64 },

    #[error("csv output failed: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
