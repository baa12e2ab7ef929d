use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid source specification: {0}")]
    InvalidSpec(String),

    #[error("transfer matrix is reducible (subshift is not irreducible)")]
    Reducible,

    #[error("degenerate source: asymptotic variance is zero (measure of maximal entropy)")]
    DegenerateSource,

    #[error("flat spectrum: the measure of maximal entropy has no large fluctuations")]
    FlatSpectrum,

    #[error("deviation u = {u} outside the valid range (u_0 = {u0})")]
    OutOfRange { u: f64, u0: f64 },

    #[error("size guard: {0}")]
    SizeGuard(String),

    #[error("operation requires exact cylinder measures (Markov source)")]
    NotMarkov,

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
