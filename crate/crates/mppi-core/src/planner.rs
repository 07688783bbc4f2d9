//! One warm-started optimization step per control cycle.

use crate::cost::{rollout_cost_with, CollisionCheck, RolloutCosts};
use crate::error::MppiError;
use crate::noise::sample_noise;
use crate::params::MppiParams;
use crate::savgol::sg_filter;
use crate::sequence::{predicted_mean_speed, shift_sequence, ControlSequence};
use crate::update::{importance_weights, update_controls};
use rayon::prelude::*;
use sim_world::{ControlInput, RobotState};

/// Per-step optimizer telemetry surfaced to the mission harness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub min_cost: f64,
    pub mean_cost: f64,
    /// Effective sample size of the importance weights.
    pub ess: f64,
    /// Mean predicted speed of the sequence before this optimization.
    pub mu_u: f64,
}

/// Sampling-based controller state: nominal sequence plus noise stream.
#[derive(Debug, Clone)]
pub struct MppiPlanner {
    params: MppiParams,
    sequence: ControlSequence,
    seed: u64,
    step: u64,
}

fn mix_seed(seed: u64, step: u64) -> u64 {
    // splitmix-style mixing keeps per-step noise streams independent.
    let mut z = seed ^ step.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl MppiPlanner {
    pub fn new(params: MppiParams, seed: u64) -> Self {
        let sequence = ControlSequence::zeros(params.horizon, params.dt);
        Self {
            params,
            sequence,
            seed,
            step: 0,
        }
    }

    pub fn params(&self) -> &MppiParams {
        &self.params
    }

    pub fn sequence(&self) -> &ControlSequence {
        &self.sequence
    }

    /// Mean predicted speed of the current warm-start sequence.
    pub fn predicted_mean_speed(&self) -> f64 {
        predicted_mean_speed(&self.sequence)
    }

    /// Runs one sample/rollout/update/smooth cycle toward `target`, returning
    /// the control to execute. The internal sequence is shifted for the next
    /// cycle.
    pub fn plan<C: CollisionCheck + Sync>(
        &mut self,
        x0: &RobotState,
        checker: &C,
        target: &RobotState,
    ) -> Result<(ControlInput, StepDiagnostics), MppiError> {
        let p = &self.params;
        let noise = sample_noise(
            p.rollouts,
            p.horizon,
            p.sigma_u,
            mix_seed(self.seed, self.step),
        )?;
        let mu_u = self.predicted_mean_speed();

        let costs: Vec<f64> = (0..p.rollouts)
            .into_par_iter()
            .map(|m| rollout_cost_with(x0, &self.sequence, noise.row(m), checker, target, p))
            .collect();
        let costs = RolloutCosts::new(costs);

        let updated = update_controls(&self.sequence, &noise, &costs, p.lambda)?;
        let smoothed = sg_filter(&updated, p.sg_poly, p.sg_window)?;
        let command = smoothed.controls[0].clamped(p.v_max, p.omega_max);

        let weights = importance_weights(&costs, p.lambda)?;
        let ess = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let diag = StepDiagnostics {
            min_cost: costs.min_cost(),
            mean_cost: costs.mean(),
            ess,
            mu_u,
        };

        self.sequence = shift_sequence(&smoothed);
        self.step += 1;
        Ok((command, diag))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::NoCollision;

    fn desk_params() -> MppiParams {
        MppiParams {
            rollouts: 128,
            horizon: 30,
            sg_window: 21,
            ..MppiParams::default()
        }
    }

    #[test]
    fn planner_is_deterministic_per_seed() {
        let x0 = RobotState::new(0.0, 0.0, 0.0);
        let goal = RobotState::new(5.0, 0.0, 0.0);
        let mut a = MppiPlanner::new(desk_params(), 99);
        let mut b = MppiPlanner::new(desk_params(), 99);
        for _ in 0..5 {
            let (ua, da) = a.plan(&x0, &NoCollision, &goal).unwrap();
            let (ub, db) = b.plan(&x0, &NoCollision, &goal).unwrap();
            assert_eq!(ua.v.to_bits(), ub.v.to_bits());
            assert_eq!(ua.omega.to_bits(), ub.omega.to_bits());
            assert_eq!(da.min_cost.to_bits(), db.min_cost.to_bits());
        }
    }

    #[test]
    fn planner_accelerates_toward_goal() {
        let mut planner = MppiPlanner::new(desk_params(), 4);
        let goal = RobotState::new(8.0, 0.0, 0.0);
        let mut state = RobotState::new(0.0, 0.0, 0.0);
        for _ in 0..90 {
            let (u, _) = planner.plan(&state, &NoCollision, &goal).unwrap();
            state = sim_world::step_dynamics(state, u, planner.params().dt);
        }
        assert!(
            state.x > 1.0,
            "robot should make forward progress, got {state:?}"
        );
    }
}
