//! Cholesky factorization with escalating diagonal jitter.

use crate::error::SgpError;
use nalgebra::{Cholesky, DMatrix, Dyn};

/// Relative jitter ladder. The first rungs are tiny so that bounds computed
/// with an inducing set equal to the training set stay within 1e-6 of the
/// exact marginal likelihood; the last rung matches the escalation limit.
pub const JITTER_LADDER: [f64; 5] = [0.0, 1e-10, 1e-8, 1e-6, 1e-4];

/// Factors `m + jitter * scale * I`, escalating jitter until it succeeds.
///
/// Returns the factorization and the absolute jitter that was applied.
pub fn jittered_cholesky(
    m: &DMatrix<f64>,
    scale: f64,
) -> Result<(Cholesky<f64, Dyn>, f64), SgpError> {
    let scale = if scale > 0.0 { scale } else { 1.0 };
    for &rel in &JITTER_LADDER {
        let jitter = rel * scale;
        let mut attempt = m.clone();
        for i in 0..attempt.nrows() {
            attempt[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(attempt) {
            return Ok((chol, jitter));
        }
    }
    Err(SgpError::FactorizationFailed {
        max_jitter: JITTER_LADDER[JITTER_LADDER.len() - 1] * scale,
    })
}
