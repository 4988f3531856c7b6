use thiserror::Error;

/// Errors produced by the design, simulation, and evaluation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("stiffness error: required step {0:e} is below 1e-15")]
    Stiffness(f64),
    #[error("post-selection impossible: final state has zero norm")]
    ZeroNorm,
}

pub type Result<T> = std::result::Result<T, Error>;
