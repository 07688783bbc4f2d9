//! Subgoal recommendation from local range data.
//!
//! A point cloud is projected onto a sensor-centered occupancy surface and
//! modeled with a sparse GP; the predictive variance separates observed
//! (occupied) directions from open ones, whose connected regions become
//! candidate subgoals at the surface radius. A distance-plus-direction cost
//! ranks them and the cheapest is handed to the local planner.

mod error;
mod frontier;
mod recommend;
mod surface;

pub use error::GpSubgoalError;
pub use frontier::{
    extract_frontiers, frontier_cost, score_frontiers, Frontier, FrontierSet, SurfaceFrontier,
    MIN_FRONTIER_CELLS,
};
pub use recommend::{
    recommend, recommend_detailed, RecommendDetails, RecommenderConfig, Subgoal,
};
pub use surface::{
    build_variance_surface, cartesian_to_spherical, cloud_to_training_set,
    OccupancySurfaceConfig, OccupancyTrainingSet, SurfaceFitConfig, VarianceSurface,
};
