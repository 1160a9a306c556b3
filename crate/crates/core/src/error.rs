use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Bad user-facing parameter (grid, domain, region, mode count, ...).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// `1 + (h/2) K(t_k, t_k)` vanished while stepping.
    #[error("singular Volterra step at node {node}")]
    SingularStep { node: usize },

    #[error("system is not normalized: a = {a}, -M(0) = {expected}")]
    NotNormalized { a: f64, expected: f64 },

    #[error("decay fit undefined: {0}")]
    UndefinedFit(String),

    #[error("coefficient of xi at mode {mode} is {value:e}, too small to divide by")]
    DivisionGuard { mode: usize, value: f64 },

    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
