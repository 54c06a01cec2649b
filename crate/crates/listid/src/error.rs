use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for a collection of {size} languages")]
    IndexOutOfRange { index: u64, size: usize },

    #[error("languages must be non-empty")]
    EmptyLanguage,

    #[error("invalid collection: {0}")]
    InvalidCollection(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("telltale size cap {cap} cannot certify exactness (language has {need} members)")]
    SizeCapTooSmall { cap: usize, need: usize },

    #[error("the {k}-Angluin condition does not hold (failing index {failing_index})")]
    ConditionNotSatisfied { k: u32, failing_index: u64 },

    #[error("the {k}-Angluin condition holds; no failing index exists")]
    ConditionSatisfied { k: u32 },

    #[error("no consistent proper-subset language below index {parent}")]
    NoDescendant { parent: u64 },

    #[error("adversary invariant violated: {0}")]
    InvariantViolation(String),

    #[error("stratification residue is non-empty: indices {0:?}")]
    ResidueNonEmpty(Vec<u64>),

    #[error("tree depth {depth} exceeds the supported maximum {max}")]
    DepthTooLarge { depth: u32, max: u32 },

    #[error("input prefix of length {got} is shorter than depth requires ({need})")]
    PrefixTooShort { got: usize, need: usize },

    #[error("fit window contains {0} positive-frequency points; at least 3 required")]
    InsufficientPositivePoints(usize),

    #[error("non-triviality unwitnessed: {0}")]
    NonTrivialityUnwitnessed(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
