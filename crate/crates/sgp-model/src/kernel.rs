//! Rational quadratic kernel over azimuth-elevation inputs.
//!
//! The azimuth axis is periodic: the metric uses the chordal embedding
//! `2 sin(dAz / 2)`, which keeps distances small through the +/-pi seam and,
//! unlike the raw arc distance, preserves positive semi-definiteness of the
//! Gram matrix. For small separations the chord is indistinguishable from
//! the arc.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Input point on the surface: [azimuth, elevation] in radians.
pub type InputPoint = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Signal variance.
    pub sigma_f2: f64,
    /// Length scale, radians.
    pub length_scale: f64,
    /// Relative weighting exponent between large and small scale variation.
    pub alpha: f64,
}

impl KernelParams {
    pub fn is_valid(&self) -> bool {
        self.sigma_f2 > 0.0 && self.length_scale > 0.0 && self.alpha > 0.0
    }
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            sigma_f2: 1.0,
            length_scale: 0.2,
            alpha: 1.0,
        }
    }
}

/// Azimuth difference through the seam, in (-pi, pi].
#[inline]
pub fn wrapped_azimuth_diff(a: f64, b: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut d = (a - b) % two_pi;
    if d <= -std::f64::consts::PI {
        d += two_pi;
    } else if d > std::f64::consts::PI {
        d -= two_pi;
    }
    d
}

/// Squared surface distance with periodic (chordal) azimuth.
#[inline]
pub fn squared_distance(z: InputPoint, zp: InputPoint) -> f64 {
    let da = 2.0 * ((z[0] - zp[0]) / 2.0).sin();
    let de = z[1] - zp[1];
    da * da + de * de
}

/// d(squared_distance)/d(z azimuth); smooth through the seam.
#[inline]
pub fn squared_distance_daz(z: InputPoint, zp: InputPoint) -> f64 {
    2.0 * (z[0] - zp[0]).sin()
}

/// k(z, z') = sigma_f^2 (1 + |z - z'|^2 / (2 alpha l^2))^(-alpha)
#[inline]
pub fn rq_kernel(z: InputPoint, zp: InputPoint, params: &KernelParams) -> f64 {
    let s = squared_distance(z, zp);
    let u = 1.0 + s / (2.0 * params.alpha * params.length_scale.powi(2));
    params.sigma_f2 * u.powf(-params.alpha)
}

/// Kernel value plus everything the gradient computations reuse.
///
/// Returns (k, s, u, k / u) where s is the squared distance and
/// u = 1 + s / (2 alpha l^2); `k / u` equals sigma_f^2 u^(-alpha-1).
#[inline]
pub fn rq_kernel_parts(z: InputPoint, zp: InputPoint, params: &KernelParams) -> (f64, f64, f64, f64) {
    let s = squared_distance(z, zp);
    let u = 1.0 + s / (2.0 * params.alpha * params.length_scale.powi(2));
    let k = params.sigma_f2 * u.powf(-params.alpha);
    (k, s, u, k / u)
}

/// Gram matrix between two point sets (rows index `a`).
pub fn kernel_matrix(a: &[InputPoint], b: &[InputPoint], params: &KernelParams) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| rq_kernel(a[i], b[j], params))
}
