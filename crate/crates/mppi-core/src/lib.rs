//! Sampling-based model predictive controller.
//!
//! Every optimization step draws Gaussian control perturbations, scores the
//! perturbed rollouts against a local costmap, folds them into the nominal
//! sequence by an importance-weighted average, smooths the result and shifts
//! it as the next warm start. Rollout evaluation is embarrassingly parallel;
//! the reduction runs in a fixed order so results never depend on scheduling.

mod cost;
mod error;
mod noise;
mod params;
mod planner;
mod savgol;
mod sequence;
mod update;

pub use cost::{
    rollout_cost, rollout_cost_with, state_cost, CollisionCheck, CostmapChecker, NoCollision,
    RolloutCosts,
};
pub use error::MppiError;
pub use noise::{sample_noise, NoiseTensor};
pub use params::{gamma_u, MppiParams};
pub use planner::{MppiPlanner, StepDiagnostics};
pub use savgol::{sg_filter, sg_kernel};
pub use sequence::{predicted_mean_speed, shift_sequence, ControlSequence};
pub use update::{importance_weights, update_controls};
