use thiserror::Error;

/// Errors raised by the solvers in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("found {found} of {wanted} roots in window [{lo}, {hi}]")]
    RootShortfall {
        found: usize,
        wanted: usize,
        lo: f64,
        hi: f64,
    },

    #[error("singular system at {0}")]
    Singular(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("inverse Laplace transform unstable: {0}")]
    Inversion(String),

    #[error("time {tau} outside available horizon [0, {horizon}]")]
    Horizon { tau: f64, horizon: f64 },

    #[error("iteration did not converge: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidInput(msg()))
    }
}
