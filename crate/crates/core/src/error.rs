use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("candidate set is empty")]
    EmptyCandidateSet,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("threshold c must be positive, got {0}")]
    NonpositiveC(f64),
    #[error("item value {value} of agent {agent} is not in the value ledger")]
    ValueNotInLedger { agent: usize, value: f64 },
    #[error("prefix is already unfair")]
    PrefixAlreadyUnfair,
    #[error("discount factor must lie in (0,1), got {0}")]
    GammaOutOfRange(f64),
    #[error("no frontier level up to k_max = {0} dominates the state")]
    KMaxExceeded(u32),
    #[error("frontier grew past the cap of {0} points")]
    FrontierSizeExceeded(usize),
    #[error("undefined extended arithmetic: {0}")]
    UndefinedArithmetic(&'static str),
    #[error("k = {k} exceeds the retained top-{k_max} lists")]
    KExceedsRetained { k: usize, k_max: usize },
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
