//! Importance-weighted control update.

use crate::cost::RolloutCosts;
use crate::error::MppiError;
use crate::noise::NoiseTensor;
use crate::sequence::ControlSequence;
use sim_world::ControlInput;

/// Softmax weights over rollout costs with the minimum subtracted first;
/// the subtraction is what keeps the exponentials from underflowing.
pub fn importance_weights(costs: &RolloutCosts, lambda: f64) -> Result<Vec<f64>, MppiError> {
    if lambda <= 0.0 {
        return Err(MppiError::NonPositiveLambda(lambda));
    }
    let min = costs.min_cost();
    let unnormalized: Vec<f64> = costs
        .costs()
        .iter()
        .map(|&c| (-(c - min) / lambda).exp())
        .collect();
    let total: f64 = unnormalized.iter().sum();
    Ok(unnormalized.into_iter().map(|w| w / total).collect())
}

/// Shifts every entry of the sequence by the weighted average perturbation.
pub fn update_controls(
    seq: &ControlSequence,
    noise: &NoiseTensor,
    costs: &RolloutCosts,
    lambda: f64,
) -> Result<ControlSequence, MppiError> {
    if costs.len() != noise.rollouts {
        return Err(MppiError::CostCountMismatch {
            costs: costs.len(),
            rows: noise.rollouts,
        });
    }
    let weights = importance_weights(costs, lambda)?;
    let mut controls = seq.controls.clone();
    for (k, u) in controls.iter_mut().enumerate() {
        let mut dv = 0.0;
        let mut dw = 0.0;
        // Fixed reduction order over rollouts keeps results reproducible.
        for (m, &w) in weights.iter().enumerate() {
            let du = noise.row(m)[k];
            dv += w * du[0];
            dw += w * du[1];
        }
        *u = ControlInput::new(u.v + dv, u.omega + dw);
    }
    Ok(ControlSequence {
        controls,
        dt: seq.dt,
    })
}
