//! Planar robot state and differential-drive kinematics.

use serde::{Deserialize, Serialize};

/// Wraps an angle to the half-open interval (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = theta % two_pi;
    if a <= -std::f64::consts::PI {
        a += two_pi;
    } else if a > std::f64::consts::PI {
        a -= two_pi;
    }
    a
}

/// Planar pose of the vehicle in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    /// Heading, kept in (-pi, pi].
    pub theta: f64,
}

impl RobotState {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    /// Euclidean distance between the planar positions of two states.
    pub fn distance_to(&self, other: &RobotState) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Commanded linear and angular velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    /// Linear speed in m/s.
    pub v: f64,
    /// Angular speed in rad/s.
    pub omega: f64,
}

impl ControlInput {
    pub fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }

    /// Clamps both channels to symmetric actuator limits.
    pub fn clamped(&self, v_max: f64, omega_max: f64) -> Self {
        Self {
            v: self.v.clamp(-v_max, v_max),
            omega: self.omega.clamp(-omega_max, omega_max),
        }
    }
}

/// One explicit-Euler step of the unicycle model.
///
/// Deterministic: control disturbances are injected by the caller.
pub fn step_dynamics(state: RobotState, control: ControlInput, dt: f64) -> RobotState {
    debug_assert!(dt > 0.0, "dt must be positive");
    RobotState {
        x: state.x + control.v * state.theta.cos() * dt,
        y: state.y + control.v * state.theta.sin() * dt,
        theta: wrap_angle(state.theta + control.omega * dt),
    }
}
