//! Controller weights and sampling configuration.

use serde::{Deserialize, Serialize};

/// Exploration weight of the quadratic control cost.
pub fn gamma_u(nu: f64) -> f64 {
    (nu - 1.0) / (2.0 * nu)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MppiParams {
    /// Inverse temperature of the importance-weighted average.
    pub lambda: f64,
    /// Exploration variance; enters the control cost through `gamma_u`.
    pub nu: f64,
    /// Control weighting matrix (row major).
    pub r: [[f64; 2]; 2],
    /// State weighting matrix (row major).
    pub q: [[f64; 3]; 3],
    pub crash_penalty: f64,
    /// Number of rollouts per optimization step.
    pub rollouts: usize,
    pub horizon: usize,
    pub dt: f64,
    /// Per-channel control noise variances, (m/s)^2 and (rad/s)^2.
    pub sigma_u: [f64; 2],
    pub v_max: f64,
    pub omega_max: f64,
    /// Disc radius used for in-rollout collision scoring.
    pub footprint_radius: f64,
    /// When false, the crash penalty is charged once per rollout instead of
    /// at every step after the first collision.
    pub crash_per_step: bool,
    pub goal_tolerance: f64,
    pub sg_window: usize,
    pub sg_poly: usize,
}

impl MppiParams {
    /// `R = lambda * Sigma_u^(-1/2)` for diagonal noise covariance.
    pub fn control_weight_from_noise(lambda: f64, sigma_u: [f64; 2]) -> [[f64; 2]; 2] {
        [
            [lambda / sigma_u[0].sqrt(), 0.0],
            [0.0, lambda / sigma_u[1].sqrt()],
        ]
    }

    pub fn gamma_u(&self) -> f64 {
        gamma_u(self.nu)
    }

    pub fn q_diag(q: [f64; 3]) -> [[f64; 3]; 3] {
        [[q[0], 0.0, 0.0], [0.0, q[1], 0.0], [0.0, 0.0, q[2]]]
    }
}

impl Default for MppiParams {
    /// Full-fidelity simulation parameterization.
    fn default() -> Self {
        let lambda = 0.572;
        let sigma_u = [0.023, 0.028];
        Self {
            lambda,
            nu: 1200.0,
            r: Self::control_weight_from_noise(lambda, sigma_u),
            q: Self::q_diag([2.5, 2.5, 5.0]),
            crash_penalty: 1e3,
            rollouts: 2528,
            horizon: 180,
            dt: 1.0 / 30.0,
            sigma_u,
            v_max: 1.5,
            omega_max: 2.0,
            footprint_radius: 0.3,
            crash_per_step: true,
            goal_tolerance: 0.3,
            sg_window: 51,
            sg_poly: 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_u_bounds_and_value() {
        assert_relative_eq!(gamma_u(1200.0), 1199.0 / 2400.0, epsilon = 1e-15);
        for nu in [1.0, 1.5, 10.0, 1200.0, 1e9] {
            let g = gamma_u(nu);
            assert!((0.0..0.5).contains(&g), "gamma_u({nu}) = {g}");
        }
    }

    #[test]
    fn default_r_matches_lambda_scaled_noise() {
        let p = MppiParams::default();
        assert_relative_eq!(p.r[0][0], 0.572 / 0.023f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(p.r[1][1], 0.572 / 0.028f64.sqrt(), epsilon = 1e-12);
        assert_eq!(p.r[0][1], 0.0);
    }
}
