//! Training data for the occupancy regression.

use crate::error::SgpError;
use crate::kernel::InputPoint;
use serde::{Deserialize, Serialize};

/// Conditioning floor for the observation noise.
pub const NOISE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub inputs: Vec<InputPoint>,
    pub targets: Vec<f64>,
    /// Observation noise variance, floored at [`NOISE_FLOOR`].
    pub noise_variance: f64,
}

impl TrainingSet {
    pub fn new(
        inputs: Vec<InputPoint>,
        targets: Vec<f64>,
        noise_variance: f64,
    ) -> Result<Self, SgpError> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(SgpError::EmptyTrainingSet);
        }
        Ok(Self {
            inputs,
            targets,
            noise_variance: noise_variance.max(NOISE_FLOOR),
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn target_variance(&self) -> f64 {
        let n = self.targets.len() as f64;
        let mean = self.targets.iter().sum::<f64>() / n;
        self.targets.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n
    }
}
