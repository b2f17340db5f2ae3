use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes do not fit the requested operation.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A result would exceed the configured size budget.
    #[error("size limit exceeded: {0}")]
    Size(String),

    /// A decomposition failed or produced non-finite output.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// An input that must be nonzero was zero.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A mathematical precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The call itself is malformed (bad indices, wrong kind of family, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// Generator parameters are out of range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A channel file could not be decoded.
    #[error("malformed channel file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
