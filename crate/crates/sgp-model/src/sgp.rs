//! Variational sparse GP with the collapsed evidence lower bound.
//!
//! The bound and its prediction equations follow the standard collapsed
//! formulation: with `A = L^{-1} K_mn / sigma`, `B = I + A A^T` and
//! `c = L_B^{-1} A y / sigma`, the bound is
//!
//! ```text
//! -n/2 ln(2 pi) - sum ln diag(L_B) - n/2 ln sigma^2
//! - |y|^2 / (2 sigma^2) + |c|^2 / 2
//! - sum k(x_i, x_i) / (2 sigma^2) + tr(A A^T) / 2
//! ```
//!
//! Predictions reuse the cached factors, costing O(m^2) per query after the
//! one-time O(n m^2) assembly.

use crate::data::TrainingSet;
use crate::error::SgpError;
use crate::factor::jittered_cholesky;
use crate::gp::Prediction;
use crate::kernel::{
    kernel_matrix, rq_kernel, rq_kernel_parts, squared_distance_daz, InputPoint, KernelParams,
};
use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub(crate) struct PredictCache {
    /// Lower Cholesky factor of the (jittered) inducing Gram matrix.
    l: DMatrix<f64>,
    /// Lower Cholesky factor of B = I + A A^T.
    l_b: DMatrix<f64>,
    c: DVector<f64>,
}

/// Sparse GP occupancy model: kernel hyperparameters, noise and inducing
/// inputs, plus cached factorizations for prediction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SgpModel {
    pub kernel: KernelParams,
    pub noise_variance: f64,
    pub inducing: Vec<InputPoint>,
    #[serde(skip)]
    pub(crate) cache: Option<PredictCache>,
}

impl SgpModel {
    pub fn new(kernel: KernelParams, noise_variance: f64, inducing: Vec<InputPoint>) -> Self {
        Self {
            kernel,
            noise_variance: noise_variance.max(crate::data::NOISE_FLOOR),
            inducing,
            cache: None,
        }
    }

    /// Rebuilds the prediction cache against a training set.
    pub fn refresh_cache(&mut self, train: &TrainingSet) -> Result<(), SgpError> {
        let parts = BoundParts::assemble(train, &self.kernel, self.noise_variance, &self.inducing)?;
        self.cache = Some(PredictCache {
            l: parts.l,
            l_b: parts.l_b,
            c: parts.c,
        });
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, SgpError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, SgpError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Everything shared between the bound value, its gradient and prediction.
struct BoundParts {
    l: DMatrix<f64>,
    l_b: DMatrix<f64>,
    c: DVector<f64>,
    a: DMatrix<f64>,
    k_mm: DMatrix<f64>,
    /// Absolute jitter added to the inducing Gram diagonal.
    jitter: f64,
    elbo: f64,
}

impl BoundParts {
    fn assemble(
        train: &TrainingSet,
        kernel: &KernelParams,
        noise_variance: f64,
        inducing: &[InputPoint],
    ) -> Result<Self, SgpError> {
        if !kernel.is_valid() {
            return Err(SgpError::InvalidKernelParams);
        }
        if train.is_empty() {
            return Err(SgpError::EmptyTrainingSet);
        }
        if inducing.is_empty() || inducing.len() > train.len() {
            return Err(SgpError::TooManyInducing {
                m: inducing.len(),
                n: train.len(),
            });
        }
        let n = train.len();
        let sigma2 = noise_variance.max(crate::data::NOISE_FLOOR);
        let sigma = sigma2.sqrt();

        let k_mm = kernel_matrix(inducing, inducing, kernel);
        let (chol_mm, jitter) = jittered_cholesky(&k_mm, kernel.sigma_f2)?;
        let l = chol_mm.l();
        let k_mn = kernel_matrix(inducing, &train.inputs, kernel);

        let a = l
            .solve_lower_triangular(&k_mn)
            .ok_or(SgpError::FactorizationFailed { max_jitter: jitter })?
            / sigma;
        let mut b = &a * a.transpose();
        for i in 0..b.nrows() {
            b[(i, i)] += 1.0;
        }
        let trace_aat = a.iter().map(|v| v * v).sum::<f64>();
        let chol_b = Cholesky::new(b).ok_or(SgpError::FactorizationFailed { max_jitter: jitter })?;
        let l_b = chol_b.l();

        let y = DVector::from_column_slice(&train.targets);
        let ay = &a * &y;
        let c = l_b
            .solve_lower_triangular(&ay)
            .ok_or(SgpError::FactorizationFailed { max_jitter: jitter })?
            / sigma;

        let knn_diag_sum: f64 = train
            .inputs
            .iter()
            .map(|&z| rq_kernel(z, z, kernel))
            .sum();
        let log_det_b: f64 = l_b.diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
        let elbo = -0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln()
            - 0.5 * log_det_b
            - 0.5 * n as f64 * sigma2.ln()
            - 0.5 * y.norm_squared() / sigma2
            + 0.5 * c.norm_squared()
            - 0.5 * knn_diag_sum / sigma2
            + 0.5 * trace_aat;

        Ok(Self {
            l,
            l_b,
            c,
            a,
            k_mm,
            jitter,
            elbo,
        })
    }
}

/// Collapsed variational lower bound on the log marginal likelihood.
pub fn elbo(train: &TrainingSet, model: &SgpModel) -> Result<f64, SgpError> {
    BoundParts::assemble(train, &model.kernel, model.noise_variance, &model.inducing)
        .map(|p| p.elbo)
}

/// Fits the cache and evaluates the bound in one pass.
pub fn fit_cache_and_elbo(train: &TrainingSet, model: &mut SgpModel) -> Result<f64, SgpError> {
    let parts = BoundParts::assemble(train, &model.kernel, model.noise_variance, &model.inducing)?;
    let elbo = parts.elbo;
    model.cache = Some(PredictCache {
        l: parts.l,
        l_b: parts.l_b,
        c: parts.c,
    });
    Ok(elbo)
}

/// Variational posterior at the query points.
pub fn sgp_predict(model: &SgpModel, queries: &[InputPoint]) -> Result<Vec<Prediction>, SgpError> {
    let cache = model.cache.as_ref().ok_or(SgpError::MissingCache)?;
    let k_mq = kernel_matrix(&model.inducing, queries, &model.kernel);
    let tmp1 = cache
        .l
        .solve_lower_triangular(&k_mq)
        .ok_or(SgpError::MissingCache)?;
    let tmp2 = cache
        .l_b
        .solve_lower_triangular(&tmp1)
        .ok_or(SgpError::MissingCache)?;
    Ok(queries
        .iter()
        .enumerate()
        .map(|(j, &q)| {
            let mean = tmp2.column(j).dot(&cache.c);
            let variance = rq_kernel(q, q, &model.kernel) - tmp1.column(j).norm_squared()
                + tmp2.column(j).norm_squared();
            Prediction {
                mean,
                variance: variance.max(0.0),
            }
        })
        .collect())
}

/// Bound value plus gradient in the optimization parameterization
/// `[ln sigma_f^2, ln l, ln alpha, ln sigma^2, z_0_az, z_0_el, ...]`.
///
/// Inducing coordinates are omitted from the gradient when
/// `with_inducing` is false.
pub fn elbo_with_grad(
    train: &TrainingSet,
    kernel: &KernelParams,
    noise_variance: f64,
    inducing: &[InputPoint],
    with_inducing: bool,
) -> Result<(f64, Vec<f64>), SgpError> {
    let parts = BoundParts::assemble(train, kernel, noise_variance, inducing)?;
    let n = train.len();
    let m = inducing.len();
    let sigma2 = noise_variance.max(crate::data::NOISE_FLOOR);
    let y = DVector::from_column_slice(&train.targets);

    // G = sigma^2 I + Q. All products below stay O(n m^2).
    let a = &parts.a;
    let sigma_c = &parts.c * sigma2.sqrt();
    let b_inv_ay = parts
        .l_b
        .tr_solve_lower_triangular(&sigma_c)
        .ok_or(SgpError::FactorizationFailed {
            max_jitter: parts.jitter,
        })?;
    // alpha = G^{-1} y
    let alpha = (&y - a.transpose() * &b_inv_ay) / sigma2;

    // T = L_B^{-1} A, S = B^{-1} A
    let t = parts
        .l_b
        .solve_lower_triangular(a)
        .ok_or(SgpError::FactorizationFailed {
            max_jitter: parts.jitter,
        })?;
    let s = parts
        .l_b
        .tr_solve_lower_triangular(&t)
        .ok_or(SgpError::FactorizationFailed {
            max_jitter: parts.jitter,
        })?;

    // P = K_mm^{-1} K_mn = sigma L^{-T} A
    let p = parts
        .l
        .tr_solve_lower_triangular(a)
        .ok_or(SgpError::FactorizationFailed {
            max_jitter: parts.jitter,
        })?
        * sigma2.sqrt();

    let p_alpha = &p * &alpha;
    let p_at = &p * a.transpose();
    // P G^{-1} = (P - (P A^T) S) / sigma^2
    let pg_inv = (&p - &p_at * &s) / sigma2;
    // PW = 0.5 (P alpha) alpha^T - 0.5 P G^{-1} + P / (2 sigma^2)
    let pw = 0.5 * &p_alpha * alpha.transpose() - 0.5 * &pg_inv + &p / (2.0 * sigma2);

    let d_kmn = 2.0 * &pw;
    let d_kmm = -(&pw * p.transpose());

    let trace_aat: f64 = a.iter().map(|v| v * v).sum();
    let trace_g_inv = (n as f64 - t.iter().map(|v| v * v).sum::<f64>()) / sigma2;
    let knn_diag_sum: f64 = train.inputs.iter().map(|&z| rq_kernel(z, z, kernel)).sum();
    let d_sigma2 = 0.5 * (alpha.norm_squared() - trace_g_inv)
        + (knn_diag_sum - sigma2 * trace_aat) / (2.0 * sigma2 * sigma2);

    // Jittered Gram matrix: its diagonal scales with sigma_f^2 as well.
    let mut k_mm_tilde = parts.k_mm.clone();
    for i in 0..m {
        k_mm_tilde[(i, i)] += parts.jitter;
    }

    let two_l2 = 2.0 * kernel.length_scale.powi(2);
    let two_al2 = 2.0 * kernel.alpha * kernel.length_scale.powi(2);

    let mut g_log_sf2 = 0.0;
    let mut g_log_l = 0.0;
    let mut g_log_alpha = 0.0;
    // sum over the inducing Gram matrix
    for j in 0..m {
        for i in 0..m {
            let g = d_kmm[(i, j)];
            let (k, sdist, u, k_over_u) = rq_kernel_parts(inducing[i], inducing[j], kernel);
            let k_tilde = if i == j { k_mm_tilde[(i, i)] } else { k };
            g_log_sf2 += g * k_tilde;
            g_log_l += g * k_over_u * sdist / kernel.length_scale.powi(2);
            g_log_alpha += g * kernel.alpha * (k * (-u.ln()) + k_over_u * sdist / two_al2);
        }
    }
    // sum over the cross Gram matrix
    for j in 0..n {
        for i in 0..m {
            let g = d_kmn[(i, j)];
            let (k, sdist, u, k_over_u) = rq_kernel_parts(inducing[i], train.inputs[j], kernel);
            g_log_sf2 += g * k;
            g_log_l += g * k_over_u * sdist / kernel.length_scale.powi(2);
            g_log_alpha += g * kernel.alpha * (k * (-u.ln()) + k_over_u * sdist / two_al2);
        }
    }
    // diagonal of K_nn enters only the trace correction
    g_log_sf2 += -knn_diag_sum / (2.0 * sigma2);

    let mut grad = vec![g_log_sf2, g_log_l, g_log_alpha, sigma2 * d_sigma2];

    if with_inducing {
        for j in 0..m {
            let zj = inducing[j];
            let mut g_az = 0.0;
            let mut g_el = 0.0;
            for i in 0..m {
                if i == j {
                    continue;
                }
                let (_, _, _, k_over_u) = rq_kernel_parts(zj, inducing[i], kernel);
                let dk_ds = -k_over_u / two_l2;
                let w = 2.0 * d_kmm[(j, i)] * dk_ds;
                g_az += w * squared_distance_daz(zj, inducing[i]);
                g_el += w * 2.0 * (zj[1] - inducing[i][1]);
            }
            for t_idx in 0..n {
                let x = train.inputs[t_idx];
                let (_, _, _, k_over_u) = rq_kernel_parts(zj, x, kernel);
                let dk_ds = -k_over_u / two_l2;
                let w = d_kmn[(j, t_idx)] * dk_ds;
                g_az += w * squared_distance_daz(zj, x);
                g_el += w * 2.0 * (zj[1] - x[1]);
            }
            grad.push(g_az);
            grad.push(g_el);
        }
    }

    Ok((parts.elbo, grad))
}

/// Trace correction term of the bound, `tr(K_nn - Q_nn) / (2 sigma^2)`;
/// exposed for tests of the bound's tightness.
pub fn trace_correction(train: &TrainingSet, model: &SgpModel) -> Result<f64, SgpError> {
    let parts = BoundParts::assemble(train, &model.kernel, model.noise_variance, &model.inducing)?;
    let sigma2 = model.noise_variance.max(crate::data::NOISE_FLOOR);
    let knn_diag_sum: f64 = train
        .inputs
        .iter()
        .map(|&z| rq_kernel(z, z, &model.kernel))
        .sum();
    let trace_q: f64 = parts.a.iter().map(|v| v * v).sum::<f64>() * sigma2;
    Ok((knn_diag_sum - trace_q) / (2.0 * sigma2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{gp_predict, log_marginal_likelihood};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_train(seed: u64, n: usize) -> TrainingSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs: Vec<InputPoint> = (0..n)
            .map(|_| [rng.random_range(-3.1..3.1), rng.random_range(0.0..0.26)])
            .collect();
        let targets: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
        TrainingSet::new(inputs, targets, 0.1).unwrap()
    }

    #[test]
    fn full_inducing_set_recovers_exact_gp() {
        let train = random_train(1, 24);
        let kernel = KernelParams {
            sigma_f2: 1.2,
            length_scale: 0.6,
            alpha: 1.3,
        };
        let mut model = SgpModel::new(kernel, train.noise_variance, train.inputs.clone());
        let bound = fit_cache_and_elbo(&train, &mut model).unwrap();
        let lml = log_marginal_likelihood(&train, &kernel).unwrap();
        assert_relative_eq!(bound, lml, max_relative = 1e-6);

        let queries: Vec<InputPoint> = (0..20).map(|i| [i as f64 * 0.3 - 3.0, 0.1]).collect();
        let sparse = sgp_predict(&model, &queries).unwrap();
        let exact = gp_predict(&train, &kernel, &queries).unwrap();
        for (s, e) in sparse.iter().zip(&exact) {
            assert_relative_eq!(s.mean, e.mean, epsilon = 1e-5);
            assert_relative_eq!(s.variance, e.variance, epsilon = 1e-5);
        }
    }

    #[test]
    fn bound_never_exceeds_marginal_likelihood() {
        for seed in 0..30 {
            let train = random_train(seed, 20);
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
            let kernel = KernelParams {
                sigma_f2: rng.random_range(0.2..2.0),
                length_scale: rng.random_range(0.1..1.0),
                alpha: rng.random_range(0.4..3.0),
            };
            let m = rng.random_range(2..train.len());
            let inducing: Vec<InputPoint> = train.inputs[..m].to_vec();
            let model = SgpModel::new(kernel, train.noise_variance, inducing);
            let bound = elbo(&train, &model).unwrap();
            let lml = log_marginal_likelihood(&train, &kernel).unwrap();
            assert!(
                bound <= lml + 1e-8,
                "seed {seed}: bound {bound} > lml {lml}"
            );
        }
    }

    #[test]
    fn trace_correction_vanishes_at_full_inducing() {
        let train = random_train(3, 16);
        let kernel = KernelParams::default();
        let model = SgpModel::new(kernel, train.noise_variance, train.inputs.clone());
        let tc = trace_correction(&train, &model).unwrap();
        assert!(tc.abs() < 1e-6, "trace correction {tc}");
    }

    #[test]
    fn far_query_recovers_prior_variance() {
        let train = random_train(4, 30);
        let kernel = KernelParams {
            sigma_f2: 2.0,
            length_scale: 0.05,
            alpha: 1.0,
        };
        let mut model = SgpModel::new(kernel, train.noise_variance, train.inputs[..10].to_vec());
        fit_cache_and_elbo(&train, &mut model).unwrap();
        // Far along the elevation axis (azimuth wraps, elevation does not).
        let p = sgp_predict(&model, &[[0.0, 40.0]]).unwrap();
        assert!(p[0].variance >= 0.9 * 2.0, "variance {}", p[0].variance);
    }

    #[test]
    fn identical_queries_identical_predictions() {
        let train = random_train(5, 18);
        let mut model = SgpModel::new(
            KernelParams::default(),
            train.noise_variance,
            train.inputs[..6].to_vec(),
        );
        fit_cache_and_elbo(&train, &mut model).unwrap();
        let p = sgp_predict(&model, &[[0.7, 0.1], [0.7, 0.1]]).unwrap();
        assert_eq!(p[0], p[1]);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        for seed in 0..5u64 {
            let train = random_train(seed + 50, 14);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let kernel = KernelParams {
                sigma_f2: rng.random_range(0.4..1.6),
                length_scale: rng.random_range(0.2..0.8),
                alpha: rng.random_range(0.6..2.0),
            };
            let noise = rng.random_range(0.05..0.3);
            let inducing: Vec<InputPoint> = train.inputs[..5].to_vec();
            let (_, grad) = elbo_with_grad(&train, &kernel, noise, &inducing, true).unwrap();

            let eval = |kp: &KernelParams, nv: f64, ind: &[InputPoint]| -> f64 {
                let model = SgpModel::new(*kp, nv, ind.to_vec());
                elbo(&train, &model).unwrap()
            };
            let h: f64 = 1e-6;
            // log-parameter perturbations
            let mut checks: Vec<(usize, f64)> = Vec::new();
            {
                let kp = |f: f64| KernelParams {
                    sigma_f2: kernel.sigma_f2 * f,
                    ..kernel
                };
                let fd = (eval(&kp((h).exp()), noise, &inducing)
                    - eval(&kp((-h).exp()), noise, &inducing))
                    / (2.0 * h);
                checks.push((0, fd));
            }
            {
                let kp = |f: f64| KernelParams {
                    length_scale: kernel.length_scale * f,
                    ..kernel
                };
                let fd = (eval(&kp(h.exp()), noise, &inducing)
                    - eval(&kp((-h).exp()), noise, &inducing))
                    / (2.0 * h);
                checks.push((1, fd));
            }
            {
                let kp = |f: f64| KernelParams {
                    alpha: kernel.alpha * f,
                    ..kernel
                };
                let fd = (eval(&kp(h.exp()), noise, &inducing)
                    - eval(&kp((-h).exp()), noise, &inducing))
                    / (2.0 * h);
                checks.push((2, fd));
            }
            {
                let fd = (eval(&kernel, noise * h.exp(), &inducing)
                    - eval(&kernel, noise * (-h).exp(), &inducing))
                    / (2.0 * h);
                checks.push((3, fd));
            }
            // two inducing coordinates
            for (pi, (j, d)) in [(4usize, (0usize, 0usize)), (7usize, (1usize, 1usize))] {
                let mut plus = inducing.clone();
                plus[j][d] += h;
                let mut minus = inducing.clone();
                minus[j][d] -= h;
                let fd = (eval(&kernel, noise, &plus) - eval(&kernel, noise, &minus)) / (2.0 * h);
                checks.push((pi, fd));
            }
            for (idx, fd) in checks {
                let scale = fd.abs().max(grad[idx].abs()).max(1e-4);
                assert!(
                    (grad[idx] - fd).abs() / scale < 1e-4,
                    "seed {seed} param {idx}: analytic {} vs fd {}",
                    grad[idx],
                    fd
                );
            }
        }
    }

    #[test]
    fn model_json_round_trip_and_cache_refresh() {
        let train = random_train(9, 12);
        let mut model = SgpModel::new(
            KernelParams::default(),
            train.noise_variance,
            train.inputs[..4].to_vec(),
        );
        fit_cache_and_elbo(&train, &mut model).unwrap();
        let text = model.to_json().unwrap();
        let mut back = SgpModel::from_json(&text).unwrap();
        assert!(matches!(
            sgp_predict(&back, &[[0.0, 0.0]]),
            Err(SgpError::MissingCache)
        ));
        back.refresh_cache(&train).unwrap();
        let a = sgp_predict(&model, &[[0.2, 0.1]]).unwrap();
        let b = sgp_predict(&back, &[[0.2, 0.1]]).unwrap();
        assert_relative_eq!(a[0].mean, b[0].mean, epsilon = 1e-12);
    }
}
