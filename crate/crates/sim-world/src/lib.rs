//! Deterministic 2D navigation worlds with differential-drive kinematics,
//! simulated range sensing and robot-centered occupancy costmaps.
//!
//! All operations are pure functions of their inputs and safe to call from
//! concurrent rollout evaluators.

mod costmap;
mod error;
mod lidar;
mod state;
mod world;

pub use costmap::{build_costmap, collision_state, CellState, CollisionGrid, Costmap2D, CostmapConfig};
pub use error::SimError;
pub use lidar::{simulate_lidar, PointCloud, SensorConfig, SphericalPoint};
pub use state::{step_dynamics, wrap_angle, ControlInput, RobotState};
pub use world::{
    make_world, Bounds, ClearZone, CorridorParams, ForestParams, MazeParams, Obstacle, Shape,
    World, WorldParams,
};
