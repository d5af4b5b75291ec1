use thiserror::Error;

/// Errors raised while building operators, evaluating scalar functions or
/// running the verification harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("site {site} out of range for a chain of {n} sites")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("{n} sites exceed the dimension cap of {cap} sites")]
    DimensionCap { n: usize, cap: usize },

    #[error("pole hit: {0}")]
    Pole(String),

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    #[error("transfer case {case} does not match the boundary fields: {reason}")]
    CaseMismatch { case: String, reason: String },

    #[error("eigenvalue iteration did not converge (achieved residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("ill-conditioned basis (condition number {0:e})")]
    IllConditioned(f64),

    #[error("invalid config at `{path}`: {msg}")]
    InvalidConfig { path: String, msg: String },

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
