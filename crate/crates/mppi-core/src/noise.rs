//! Seeded Gaussian control perturbations.

use crate::error::MppiError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// M x N perturbations of the two control channels, row per rollout.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTensor {
    pub rollouts: usize,
    pub horizon: usize,
    /// Diagonal covariance the samples were drawn from.
    pub sigma_u: [f64; 2],
    samples: Vec<[f64; 2]>,
}

impl NoiseTensor {
    /// Wraps externally supplied perturbations (row major, M x N).
    pub fn from_samples(
        rollouts: usize,
        horizon: usize,
        sigma_u: [f64; 2],
        samples: Vec<[f64; 2]>,
    ) -> Self {
        assert_eq!(samples.len(), rollouts * horizon);
        Self {
            rollouts,
            horizon,
            sigma_u,
            samples,
        }
    }

    #[inline]
    pub fn row(&self, m: usize) -> &[[f64; 2]] {
        &self.samples[m * self.horizon..(m + 1) * self.horizon]
    }

    pub fn samples(&self) -> &[[f64; 2]] {
        &self.samples
    }
}

/// Draws i.i.d. zero-mean Gaussian perturbations, deterministic per seed.
///
/// Sample order is row major: all horizon entries of rollout 0 first, the
/// linear channel drawn before the angular channel at each entry.
pub fn sample_noise(
    rollouts: usize,
    horizon: usize,
    sigma_u: [f64; 2],
    seed: u64,
) -> Result<NoiseTensor, MppiError> {
    for &var in &sigma_u {
        if var < 0.0 {
            return Err(MppiError::NegativeVariance(var));
        }
    }
    let normal_v = Normal::new(0.0, sigma_u[0].sqrt()).expect("validated std dev");
    let normal_w = Normal::new(0.0, sigma_u[1].sqrt()).expect("validated std dev");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(rollouts * horizon);
    for _ in 0..rollouts * horizon {
        let dv = normal_v.sample(&mut rng);
        let dw = normal_w.sample(&mut rng);
        samples.push([dv, dw]);
    }
    Ok(NoiseTensor {
        rollouts,
        horizon,
        sigma_u,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn channel_variance(t: &NoiseTensor, ch: usize) -> f64 {
        let n = t.samples().len() as f64;
        let mean: f64 = t.samples().iter().map(|s| s[ch]).sum::<f64>() / n;
        t.samples().iter().map(|s| (s[ch] - mean).powi(2)).sum::<f64>() / n
    }

    #[test]
    fn degenerate_variance_gives_zeros() {
        let t = sample_noise(16, 8, [0.0, 0.0], 3).unwrap();
        assert!(t.samples().iter().all(|s| s[0] == 0.0 && s[1] == 0.0));
    }

    #[test]
    fn negative_variance_rejected() {
        assert!(matches!(
            sample_noise(1, 1, [-0.1, 0.0], 0),
            Err(MppiError::NegativeVariance(_))
        ));
    }

    #[test]
    fn sample_variance_matches_request() {
        let t = sample_noise(100_000, 1, [0.023, 0.028], 42).unwrap();
        let var_v = channel_variance(&t, 0);
        let var_w = channel_variance(&t, 1);
        assert!((0.021..=0.025).contains(&var_v), "var_v = {var_v}");
        assert!((0.026..=0.030).contains(&var_w), "var_w = {var_w}");
    }

    #[test]
    fn same_seed_same_tensor() {
        let a = sample_noise(32, 16, [0.023, 0.028], 7).unwrap();
        let b = sample_noise(32, 16, [0.023, 0.028], 7).unwrap();
        assert_eq!(a, b);
        let c = sample_noise(32, 16, [0.023, 0.028], 8).unwrap();
        assert_ne!(a, c);
    }
}
