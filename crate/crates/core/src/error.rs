use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("problem too large for exact computation: {0}")]
    TooLarge(String),

    #[error("M = {m} is outside the validity range M <= n/3 (n = {n})")]
    OutOfValidityRange { n: usize, m: usize },

    #[error("rejection sampling exhausted {attempts} attempts without acceptance")]
    RejectionBudgetExhausted { attempts: u64 },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
