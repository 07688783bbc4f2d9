//! Exact GP regression; the dense oracle the sparse model is checked against.

use crate::data::TrainingSet;
use crate::error::SgpError;
use crate::factor::jittered_cholesky;
use crate::kernel::{kernel_matrix, rq_kernel, InputPoint, KernelParams};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub mean: f64,
    /// Posterior variance of the latent function, clamped at zero.
    pub variance: f64,
}

fn gram_with_noise(train: &TrainingSet, params: &KernelParams) -> DMatrix<f64> {
    let mut k = kernel_matrix(&train.inputs, &train.inputs, params);
    for i in 0..train.len() {
        k[(i, i)] += train.noise_variance;
    }
    k
}

/// Zero-mean GP posterior at the query points.
pub fn gp_predict(
    train: &TrainingSet,
    params: &KernelParams,
    queries: &[InputPoint],
) -> Result<Vec<Prediction>, SgpError> {
    if !params.is_valid() {
        return Err(SgpError::InvalidKernelParams);
    }
    let k = gram_with_noise(train, params);
    let (chol, _) = jittered_cholesky(&k, params.sigma_f2)?;
    let y = DVector::from_column_slice(&train.targets);
    let alpha = chol.solve(&y);

    // K_nq, one column per query.
    let knq = kernel_matrix(&train.inputs, queries, params);
    let means = knq.transpose() * &alpha;
    // v = L^{-1} K_nq, variance = k(q, q) - sum v^2 per column.
    let v = chol
        .l()
        .solve_lower_triangular(&knq)
        .expect("triangular solve after successful factorization");
    Ok(queries
        .iter()
        .enumerate()
        .map(|(j, &q)| {
            let reduction = v.column(j).norm_squared();
            Prediction {
                mean: means[j],
                variance: (rq_kernel(q, q, params) - reduction).max(0.0),
            }
        })
        .collect())
}

/// log N(y | 0, sigma^2 I + K_nn)
pub fn log_marginal_likelihood(train: &TrainingSet, params: &KernelParams) -> Result<f64, SgpError> {
    if !params.is_valid() {
        return Err(SgpError::InvalidKernelParams);
    }
    let n = train.len() as f64;
    let k = gram_with_noise(train, params);
    let (chol, _) = jittered_cholesky(&k, params.sigma_f2)?;
    let y = DVector::from_column_slice(&train.targets);
    let alpha = chol.solve(&y);
    let log_det: f64 = chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
    Ok(-0.5 * y.dot(&alpha) - 0.5 * log_det - 0.5 * n * (2.0 * std::f64::consts::PI).ln())
}
