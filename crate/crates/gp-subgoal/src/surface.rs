//! Occupancy surface construction and the SGP variance surface.
//!
//! Sensor returns project onto a sensor-centered band of radius `r_oc`:
//! each direction carries the occupancy value `r_oc - r`. Returns beyond
//! `r_oc` land on the surface with occupancy zero; they are evidence of free
//! space out to the surface radius, which is what lets the model distinguish
//! "seen and open" from "never observed".

use crate::error::GpSubgoalError;
use serde::{Deserialize, Serialize};
use sgp_model::{fit, InputPoint, OptConfig, SgpModel, TrainingSet};
use sim_world::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupancySurfaceConfig {
    /// Surface radius, meters.
    pub r_oc: f64,
    /// Elevation band, radians.
    pub elevation_min: f64,
    pub elevation_max: f64,
    /// Query grid resolution over the full azimuth circle and the band.
    pub grid_azimuth: usize,
    pub grid_elevation: usize,
}

impl Default for OccupancySurfaceConfig {
    fn default() -> Self {
        Self {
            r_oc: 5.0,
            elevation_min: 0.0,
            elevation_max: 15f64.to_radians(),
            grid_azimuth: 90,
            grid_elevation: 4,
        }
    }
}

impl OccupancySurfaceConfig {
    pub fn grid_points(&self) -> Vec<InputPoint> {
        let mut pts = Vec::with_capacity(self.grid_azimuth * self.grid_elevation);
        for j in 0..self.grid_elevation {
            let el = if self.grid_elevation <= 1 {
                self.elevation_min
            } else {
                self.elevation_min
                    + (self.elevation_max - self.elevation_min) * j as f64
                        / (self.grid_elevation - 1) as f64
            };
            for i in 0..self.grid_azimuth {
                pts.push([self.azimuth_of(i), el]);
            }
        }
        pts
    }

    pub fn azimuth_of(&self, i: usize) -> f64 {
        sim_world::wrap_angle(
            -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / self.grid_azimuth as f64,
        )
    }
}

/// Azimuth/elevation inputs with occupancy targets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OccupancyTrainingSet {
    pub inputs: Vec<InputPoint>,
    pub targets: Vec<f64>,
}

impl OccupancyTrainingSet {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Spherical coordinates (azimuth, elevation, range) of a Cartesian point.
pub fn cartesian_to_spherical(x: f64, y: f64, z: f64) -> (f64, f64, f64) {
    let r = (x * x + y * y + z * z).sqrt();
    let azimuth = y.atan2(x);
    let elevation = if r > 0.0 { (z / r).asin() } else { 0.0 };
    (azimuth, elevation, r)
}

/// Projects a point cloud onto the occupancy surface.
///
/// Points outside the elevation band are dropped; points beyond `r_oc` are
/// kept with occupancy zero.
pub fn cloud_to_training_set(
    cloud: &PointCloud,
    config: &OccupancySurfaceConfig,
) -> OccupancyTrainingSet {
    let tol = 1e-9;
    let mut out = OccupancyTrainingSet::default();
    for p in &cloud.points {
        if p.elevation < config.elevation_min - tol || p.elevation > config.elevation_max + tol {
            continue;
        }
        out.inputs.push([p.azimuth, p.elevation]);
        out.targets.push((config.r_oc - p.range).max(0.0));
    }
    out
}

/// SGP predictive mean/variance over the query grid plus the frontier
/// threshold derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceSurface {
    pub config: OccupancySurfaceConfig,
    /// Row-major (elevation-major) mean and variance per grid node.
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub v_th: f64,
    pub k_m: f64,
}

impl VarianceSurface {
    #[inline]
    pub fn idx(&self, az: usize, el: usize) -> usize {
        el * self.config.grid_azimuth + az
    }
}

/// Tunables for the online SGP fit inside the recommender.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFitConfig {
    pub inducing: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub optimize_inducing: bool,
    /// Observation noise. Range returns are effectively noise-free, so this
    /// stays pinned during optimization by default; fitting it would let the
    /// bound inflate noise to mask sparsity error and wash out the variance
    /// contrast the frontiers are cut from.
    pub noise_variance: f64,
    pub optimize_noise: bool,
    /// Length-scale cap; openings narrower than the fitted length scale get
    /// smoothed over and lose their frontier, so this is tied to the
    /// smallest gap the robot should still spot (radians).
    pub length_scale_max: f64,
}

impl Default for SurfaceFitConfig {
    fn default() -> Self {
        Self {
            inducing: 100,
            iterations: 30,
            learning_rate: 0.08,
            optimize_inducing: true,
            noise_variance: 1e-4,
            optimize_noise: false,
            length_scale_max: 0.15,
        }
    }
}

/// Fits the occupancy model and predicts over the grid.
///
/// An empty training set yields the uniform prior surface (unit variance,
/// zero mean): with nothing observed, everything is frontier.
pub fn build_variance_surface(
    train: &OccupancyTrainingSet,
    config: &OccupancySurfaceConfig,
    fit_config: &SurfaceFitConfig,
    k_m: f64,
    seed: u64,
) -> Result<(VarianceSurface, Option<SgpModel>), GpSubgoalError> {
    let grid = config.grid_points();
    if train.is_empty() {
        let n = grid.len();
        return Ok((
            VarianceSurface {
                config: *config,
                mean: vec![0.0; n],
                variance: vec![1.0; n],
                v_th: k_m,
                k_m,
            },
            None,
        ));
    }
    let ts = TrainingSet::new(
        train.inputs.clone(),
        train.targets.clone(),
        fit_config.noise_variance,
    )?;
    let m_s = fit_config.inducing.min(ts.len()).max(1);
    let opt = OptConfig {
        iterations: fit_config.iterations,
        learning_rate: fit_config.learning_rate,
        optimize_inducing: fit_config.optimize_inducing,
        length_scale_max: fit_config.length_scale_max,
        optimize_noise: fit_config.optimize_noise,
        ..OptConfig::default()
    };
    let (model, _report) = fit(&ts, m_s, seed, &opt)?;
    let preds = sgp_model::sgp_predict(&model, &grid)?;
    let mean: Vec<f64> = preds.iter().map(|p| p.mean).collect();
    let variance: Vec<f64> = preds.iter().map(|p| p.variance).collect();
    let v_m = variance.iter().sum::<f64>() / variance.len() as f64;
    Ok((
        VarianceSurface {
            config: *config,
            mean,
            variance,
            v_th: k_m * v_m,
            k_m,
        },
        Some(model),
    ))
}
