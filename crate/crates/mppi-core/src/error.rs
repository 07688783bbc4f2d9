use thiserror::Error;

#[derive(Debug, Error)]
pub enum MppiError {
    #[error("noise variance must be non-negative, got {0}")]
    NegativeVariance(f64),
    #[error("inverse temperature must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("rollout count mismatch: {costs} costs for {rows} noise rows")]
    CostCountMismatch { costs: usize, rows: usize },
    #[error("smoothing window must be odd, got {0}")]
    EvenWindow(usize),
    #[error("smoothing window {window} exceeds sequence length {len}")]
    WindowTooLong { window: usize, len: usize },
    #[error("smoothing window {window} must exceed polynomial order {order}")]
    WindowTooShort { window: usize, order: usize },
}
