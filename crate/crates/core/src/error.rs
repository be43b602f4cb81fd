use thiserror::Error;

/// Errors produced by the detection library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is out of range or inconsistent.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Vector or matrix dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A strategy proposed a measurement vector that the active budget
    /// cannot accept. `index` is the zero-based measurement index of the
    /// offending proposal.
    #[error("budget violation at measurement {index}: {detail}")]
    BudgetViolation { index: usize, detail: String },

    /// An exact enumeration was requested over a prior whose support is
    /// too large to enumerate.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn dimension(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
