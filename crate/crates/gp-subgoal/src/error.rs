use thiserror::Error;

#[derive(Debug, Error)]
pub enum GpSubgoalError {
    /// Recoverable: the caller should reuse its previous subgoal.
    #[error("occupancy model fit failed: {0}")]
    Fit(#[from] sgp_model::SgpError),
    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),
}
