//! Horizon-length control sequences and their bookkeeping.

use serde::{Deserialize, Serialize};
use sim_world::ControlInput;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSequence {
    pub controls: Vec<ControlInput>,
    pub dt: f64,
}

impl ControlSequence {
    pub fn zeros(horizon: usize, dt: f64) -> Self {
        Self {
            controls: vec![ControlInput::default(); horizon],
            dt,
        }
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }
}

/// Warm start for the next step: slide everything down one slot and
/// re-initialize the tail by repeating the previous final entry.
pub fn shift_sequence(seq: &ControlSequence) -> ControlSequence {
    let mut controls = Vec::with_capacity(seq.len());
    controls.extend_from_slice(&seq.controls[1.min(seq.len())..]);
    if let Some(&last) = seq.controls.last() {
        controls.push(last);
    }
    ControlSequence {
        controls,
        dt: seq.dt,
    }
}

/// Mean absolute linear speed over the horizon.
pub fn predicted_mean_speed(seq: &ControlSequence) -> f64 {
    if seq.is_empty() {
        return 0.0;
    }
    seq.controls.iter().map(|u| u.v.abs()).sum::<f64>() / seq.len() as f64
}
