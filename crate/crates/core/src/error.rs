use thiserror::Error;

/// Errors produced by the numerical kernels, model builders and drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below -{tolerance:e}")]
    NotPsd { eigenvalue: f64, tolerance: f64 },

    #[error("Hilbert-space dimension {requested} exceeds the supported maximum {max}")]
    Capacity { requested: usize, max: usize },

    #[error("no isolated zero-mode pair: {0}")]
    NotTopological(String),

    #[error("singular parameters: {0}")]
    SingularParameter(String),

    #[error(
        "propagated trace {trace:e} underflowed at t = {time}; renormalize more often (shorter readout spacing)"
    )]
    Underflow { time: f64, trace: f64 },

    #[error("eigendecomposition failed to converge")]
    NoConvergence,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
