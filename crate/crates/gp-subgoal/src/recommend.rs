//! The full recommendation pipeline: cloud -> occupancy training set ->
//! variance surface -> frontiers -> scored optimal subgoal.

use crate::error::GpSubgoalError;
use crate::frontier::{extract_frontiers, score_frontiers, FrontierSet};
use crate::surface::{
    build_variance_surface, cloud_to_training_set, OccupancySurfaceConfig, SurfaceFitConfig,
    VarianceSurface,
};
use serde::{Deserialize, Serialize};
use sim_world::{wrap_angle, PointCloud, RobotState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecommenderConfig {
    pub surface: OccupancySurfaceConfig,
    pub fit: SurfaceFitConfig,
    /// Variance threshold scale: V_th = k_m * mean variance.
    pub k_m: f64,
    /// Distance and direction weights of the frontier cost.
    pub k_dst: f64,
    pub k_dir: f64,
}

impl Default for RecommenderConfig {
    fn default() -> Self {
        Self {
            surface: OccupancySurfaceConfig::default(),
            fit: SurfaceFitConfig::default(),
            k_m: 0.4,
            k_dst: 5.0,
            k_dir: 4.0,
        }
    }
}

/// Recommended subgoal pose: position of the optimal frontier with the
/// world-frame bearing from the robot as heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subgoal {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// Per-call internals, dumpable for visualization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendDetails {
    pub surface: VarianceSurface,
    pub frontiers: FrontierSet,
    pub training_points: usize,
}

impl RecommendDetails {
    pub fn to_json(&self) -> Result<String, GpSubgoalError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Full pipeline; `None` when no frontier survives extraction (the caller
/// falls back to the global goal).
pub fn recommend(
    cloud: &PointCloud,
    robot: &RobotState,
    goal: &RobotState,
    config: &RecommenderConfig,
    seed: u64,
) -> Result<Option<Subgoal>, GpSubgoalError> {
    recommend_detailed(cloud, robot, goal, config, seed).map(|(s, _)| s)
}

/// As [`recommend`], additionally returning the surface and frontier set.
pub fn recommend_detailed(
    cloud: &PointCloud,
    robot: &RobotState,
    goal: &RobotState,
    config: &RecommenderConfig,
    seed: u64,
) -> Result<(Option<Subgoal>, RecommendDetails), GpSubgoalError> {
    let train = cloud_to_training_set(cloud, &config.surface);
    let (surface, _model) =
        build_variance_surface(&train, &config.surface, &config.fit, config.k_m, seed)?;
    let surface_frontiers = extract_frontiers(&surface);
    let set = score_frontiers(
        &surface_frontiers,
        robot,
        goal,
        config.surface.r_oc,
        config.k_dst,
        config.k_dir,
    );
    let subgoal = set.optimal.map(|i| {
        let f = set.frontiers[i];
        Subgoal {
            x: f.x,
            y: f.y,
            theta: wrap_angle(robot.theta + f.azimuth),
        }
    });
    Ok((
        subgoal,
        RecommendDetails {
            surface,
            frontiers: set,
            training_points: train.len(),
        },
    ))
}
