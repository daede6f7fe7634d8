use thiserror::Error;

/// Errors raised while validating, reducing or evaluating partition problems.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("column {0} is all zero")]
    ZeroColumn(usize),
    #[error("column {0} has no positive entry; the system is not definite")]
    NonDefinite(usize),
    #[error("column {column} has negative entry {value}; top-level generators must be nonnegative")]
    NegativeEntry { column: usize, value: String },
    #[error("generator set contains a zero entry")]
    ZeroGenerator,
    #[error("generator {0} is not positive")]
    NonPositiveGenerator(String),
    #[error("column {column} cannot be handled here: {reason}")]
    ColumnClass { column: usize, reason: String },
    #[error("symbol {0} is not bound in the evaluation context")]
    UnboundSymbol(usize),
    #[error("form {0} does not take an integer value here")]
    NonIntegral(String),
    #[error("value out of evaluable range: {0}")]
    Overflow(String),
    #[error("symbolic column is not a list of distinct plain arguments: {0}")]
    SymbolicColumn(String),
    #[error("invalid row order: {0}")]
    RowOrder(String),
    #[error("malformed document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;
