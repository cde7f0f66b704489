use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("operator is not hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("negative rate {0}")]
    NegativeRate(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("stationary state is not unique (reciprocal condition {0:e})")]
    NonUniqueStationary(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by caller-supplied inputs rather than by a broken numerical invariant.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_) | Error::NegativeTime(_) | Error::Dimension(_) | Error::NegativeRate(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}
