use thiserror::Error;

#[derive(Debug, Error)]
pub enum SgpError {
    #[error("training set must contain at least one point")]
    EmptyTrainingSet,
    #[error("kernel parameters must be strictly positive")]
    InvalidKernelParams,
    #[error("Cholesky factorization failed after jitter escalation to {max_jitter:e}")]
    FactorizationFailed { max_jitter: f64 },
    #[error("inducing point count {m} exceeds training size {n}")]
    TooManyInducing { m: usize, n: usize },
    #[error("model has no prediction cache; fit it or call refresh_cache")]
    MissingCache,
    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),
}
