use thiserror::Error;

/// Which defining condition of a p-atom was violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomCondition {
    /// a) the integral over the base cylinder is not zero
    Mean,
    /// b) the sup norm exceeds `mu(I)^(-1/p)`
    Sup,
    /// c) the function does not vanish off the base cylinder
    Support,
}

impl std::fmt::Display for AtomCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AtomCondition::Mean => f.write_str("a) zero mean"),
            AtomCondition::Sup => f.write_str("b) sup bound"),
            AtomCondition::Support => f.write_str("c) support"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid generator m_{index} = {value}: every entry must be at least 2")]
    InvalidGenerator { index: usize, value: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("rank {needed} required but only {available} available")]
    Rank { needed: usize, available: usize },

    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("group mismatch between operands")]
    GroupMismatch,

    #[error("invalid digit {digit} at position {position} (radix {radix})")]
    InvalidDigit {
        position: usize,
        digit: usize,
        radix: usize,
    },

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not a p-atom: condition {condition} fails ({detail})")]
    Atom {
        condition: AtomCondition,
        detail: String,
    },

    #[error("weight hypothesis violated: {0}")]
    Weight(String),

    #[error("fixture error: {0}")]
    Fixture(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
