use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("Gram matrix condition number {0:.3e} exceeds 1e8; grid too coarse")]
    IllConditioned(f64),
    #[error("dense assembly needs {0} unknowns, limit is {1}")]
    TooLarge(usize, usize),
    #[error("time step {dt:.3e} exceeds stability bound {bound:.3e}")]
    Unstable { dt: f64, bound: f64 },
    #[error("blow-up at t = {t:.5}: norm grew by a factor {factor:.3e}")]
    BlowUp { t: f64, factor: f64 },
    #[error("negative density at t = {t:.5}: min {min:.3e} below -1e-8 max")]
    Negative { t: f64, min: f64 },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
