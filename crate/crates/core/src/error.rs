use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input to {0}")]
    NonFinite(&'static str),

    /// The oracle or source does not offer the requested channel.
    #[error("capability not supported: {0}")]
    Unsupported(&'static str),

    /// The mean-estimation contract requires `sigma_hat <= L`.
    #[error("contract violation: target error {sigma_hat} exceeds second-moment bound {bound}")]
    ContractViolation { sigma_hat: f64, bound: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ellipsoid shape matrix is no longer positive definite")]
    NumericDegeneracy,

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
