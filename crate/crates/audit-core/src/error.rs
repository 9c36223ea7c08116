use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    /// A record in a bundle file failed to parse or violated a field
    /// constraint; `line` is 1-based.
    #[error("{file}:{line}: {message}")]
    Malformed {
        file: String,
        line: usize,
        message: String,
    },

    #[error("referential integrity: {0}")]
    Integrity(String),

    #[error("duplicate id: {0}")]
    Duplicate(String),

    #[error("no accounts")]
    NoAccounts,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("undefined JD: both sets empty")]
    UndefinedJaccard,

    #[error("undefined NDLD: both lists empty")]
    UndefinedNdld,

    #[error("IPD undefined: no partisan comments")]
    UndefinedIpd,

    #[error("kappa undefined: expected agreement is 1")]
    UndefinedKappa,

    #[error("constant input: {0}")]
    ConstantInput(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("account {0} not present in dissimilarity matrix")]
    MissingAccount(String),

    #[error("group too small: {0}")]
    GroupTooSmall(String),

    #[error("missing stance label: {0}")]
    MissingStance(String),

    #[error("position {position} exceeds exposure of account {account} (length {len})")]
    PositionOutOfRange {
        account: String,
        position: usize,
        len: usize,
    },

    #[error("classifier: {0}")]
    Classifier(String),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
