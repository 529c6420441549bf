use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FairDivError {
    #[error("malformed document: {0}")]
    Malformed(String),

    #[error("negative value for agent {agent}, good {good}")]
    NegativeValue { agent: usize, good: usize },

    #[error("instance has no agents or no goods")]
    EmptyInstance,

    #[error("good {0} is not positively valued by any agent")]
    ZeroGood(usize),

    #[error("agent {0} values every good at zero")]
    ZeroAgent(usize),

    #[error("invalid generator parameters: {0}")]
    InvalidModel(String),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("envy graph contains a cycle")]
    CyclePresent,

    #[error("cycle elimination exceeded its iteration cap of {0}")]
    IterationCap(usize),

    #[error("good {good} does not maximize the base value over the unassigned goods")]
    NotMaximal { good: usize },

    #[error("range parameter {0} outside the supported interval")]
    GammaOutOfRange(String),

    #[error("set of {size} positively valued items exceeds the enumeration cap of {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("scaling factor for agent {0} is not positive")]
    NonPositiveFactor(usize),

    #[error("precision of {0} bits is below the supported minimum")]
    Precision(u32),
}

pub type Result<T> = std::result::Result<T, FairDivError>;
