use thiserror::Error;

/// Errors raised anywhere in the simulation and estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "fGn generation failed: circulant embedding ({embedding}); Cholesky fallback ({cholesky})"
    )]
    Generation { embedding: String, cholesky: String },

    #[error("simulation diverged at index {index}: sigma^2 = {value}")]
    Simulation { index: usize, value: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("regime violation: alpha1 = {alpha1} does not satisfy the {bound} bound alpha1 < {threshold}")]
    Regime {
        bound: &'static str,
        alpha1: f64,
        threshold: f64,
    },

    #[error("series of length {len} too short for max lag {max_lag} (need more than max_lag observations)")]
    Dimension { len: usize, max_lag: usize },

    #[error("liquidity covariance error: {0}")]
    Covariance(String),

    #[error("parameters are unidentifiable: quadratic and linear coefficients both vanish")]
    Unidentifiable,

    #[error("no real estimates to summarize")]
    NoRealEstimates,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
