use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("sensor pose ({0:.3}, {1:.3}) is inside an obstacle")]
    PoseInsideObstacle(f64, f64),
    #[error("pose ({0:.3}, {1:.3}) is outside the world bounds")]
    PoseOutOfBounds(f64, f64),
    #[error("requested obstacle density {requested:.3}/m^2 unachievable: placed {placed} of {target}")]
    DensityUnachievable {
        requested: f64,
        placed: usize,
        target: usize,
    },
    #[error("start or goal placement ({0:.3}, {1:.3}) is not in free space")]
    BlockedPlacement(f64, f64),
    #[error("invalid world parameter: {0}")]
    InvalidParameter(String),
    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),
}
