//! Simulated multi-ring range sensing over 2D worlds.
//!
//! Rays are cast in the horizontal plane; elevation rings report the slant
//! range `d / cos(elevation)` of the planar hit at distance `d`, so the
//! spherical geometry of the occupancy surface is exercised even though the
//! world itself is flat.

use crate::error::SimError;
use crate::state::{wrap_angle, RobotState};
use crate::world::{Shape, World};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// One sensor return in the sensor frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalPoint {
    pub azimuth: f64,
    pub elevation: f64,
    pub range: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<SphericalPoint>,
}

impl PointCloud {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    pub azimuth_rays: usize,
    pub elevation_rays: usize,
    /// Elevation band, radians.
    pub elevation_min: f64,
    pub elevation_max: f64,
    /// Maximum slant range; rays without a hit inside it produce no return.
    pub r_max: f64,
    /// Omit obstacles flagged `recommender_visible = false`.
    pub recommender_only: bool,
    /// Optional zero-mean Gaussian range noise (standard deviation, meters).
    pub range_noise_std: f64,
    pub noise_seed: u64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            azimuth_rays: 360,
            elevation_rays: 1,
            elevation_min: 0.0,
            elevation_max: 15f64.to_radians(),
            r_max: 5.0,
            recommender_only: false,
            range_noise_std: 0.0,
            noise_seed: 0,
        }
    }
}

impl SensorConfig {
    /// Elevation angle of ring `i`; rings span the band inclusively.
    pub fn elevation_of(&self, i: usize) -> f64 {
        if self.elevation_rays <= 1 {
            self.elevation_min
        } else {
            self.elevation_min
                + (self.elevation_max - self.elevation_min) * i as f64
                    / (self.elevation_rays - 1) as f64
        }
    }

    /// Azimuth of ray `i`, wrapped to (-pi, pi].
    pub fn azimuth_of(&self, i: usize) -> f64 {
        let step = 2.0 * std::f64::consts::PI / self.azimuth_rays as f64;
        wrap_angle(-std::f64::consts::PI + i as f64 * step)
    }
}

/// Nearest positive ray parameter hitting `shape`, if any.
///
/// The ray is `(ox, oy) + t (dx, dy)` with `(dx, dy)` unit length, so `t` is
/// the planar hit distance.
fn ray_hit(shape: &Shape, ox: f64, oy: f64, dx: f64, dy: f64) -> Option<f64> {
    match *shape {
        Shape::Circle { cx, cy, radius } => {
            let fx = ox - cx;
            let fy = oy - cy;
            let b = fx * dx + fy * dy;
            let c = fx * fx + fy * fy - radius * radius;
            let disc = b * b - c;
            if disc < 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            let t0 = -b - sq;
            let t1 = -b + sq;
            if t0 > 0.0 {
                Some(t0)
            } else if t1 > 0.0 {
                Some(t1)
            } else {
                None
            }
        }
        Shape::Rect {
            cx,
            cy,
            half_w,
            half_h,
        } => {
            // Slab method.
            let mut tmin = f64::NEG_INFINITY;
            let mut tmax = f64::INFINITY;
            for (o, d, lo, hi) in [
                (ox, dx, cx - half_w, cx + half_w),
                (oy, dy, cy - half_h, cy + half_h),
            ] {
                if d.abs() < 1e-15 {
                    if o < lo || o > hi {
                        return None;
                    }
                } else {
                    let inv = 1.0 / d;
                    let (t0, t1) = ((lo - o) * inv, (hi - o) * inv);
                    let (t0, t1) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
                    tmin = tmin.max(t0);
                    tmax = tmax.min(t1);
                    if tmin > tmax {
                        return None;
                    }
                }
            }
            if tmin > 0.0 {
                Some(tmin)
            } else if tmax > 0.0 {
                Some(tmax)
            } else {
                None
            }
        }
    }
}

/// Casts all configured rays from `pose` and returns first-hit ranges.
pub fn simulate_lidar(
    world: &World,
    pose: &RobotState,
    config: &SensorConfig,
) -> Result<PointCloud, SimError> {
    if !world.bounds.contains(pose.x, pose.y) {
        return Err(SimError::PoseOutOfBounds(pose.x, pose.y));
    }
    let relevant: Vec<&Shape> = world
        .obstacles
        .iter()
        .filter(|o| !config.recommender_only || o.recommender_visible)
        .map(|o| &o.shape)
        .collect();
    if world.point_in_obstacle(pose.x, pose.y) {
        return Err(SimError::PoseInsideObstacle(pose.x, pose.y));
    }

    let mut noise = if config.range_noise_std > 0.0 {
        let rng = ChaCha8Rng::seed_from_u64(config.noise_seed);
        Some((rng, Normal::new(0.0, config.range_noise_std).unwrap()))
    } else {
        None
    };

    let mut points = Vec::new();
    for ring in 0..config.elevation_rays {
        let elevation = config.elevation_of(ring);
        let cos_el = elevation.cos();
        let planar_max = config.r_max * cos_el;
        for i in 0..config.azimuth_rays {
            let azimuth = config.azimuth_of(i);
            let world_angle = pose.theta + azimuth;
            let (dx, dy) = (world_angle.cos(), world_angle.sin());
            let mut nearest = f64::INFINITY;
            for shape in &relevant {
                if let Some(t) = ray_hit(shape, pose.x, pose.y, dx, dy) {
                    if t < nearest {
                        nearest = t;
                    }
                }
            }
            if nearest.is_finite() && nearest <= planar_max {
                let mut range = nearest / cos_el;
                if let Some((rng, dist)) = noise.as_mut() {
                    range = (range + dist.sample(rng)).max(1e-6).min(config.r_max);
                }
                points.push(SphericalPoint {
                    azimuth,
                    elevation,
                    range,
                });
            }
        }
    }
    Ok(PointCloud { points })
}
