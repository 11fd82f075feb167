//! Axis-angle rotations.

use nalgebra::{Matrix3, Vector3};

const SMALL_ANGLE: f64 = 1e-4;

pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rotation matrix of an axis-angle vector (Rodrigues' formula).
pub fn rodrigues(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = w.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < SMALL_ANGLE {
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let k = skew(w);
    Matrix3::identity() + k * a + k * k * b
}

/// Right Jacobian of SO(3): `R(w + d) ≈ R(w) · exp(J_r(w) d)` to first order.
pub fn right_jacobian(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = w.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < SMALL_ANGLE {
        (0.5 - theta2 / 24.0, 1.0 / 6.0 - theta2 / 120.0)
    } else {
        ((1.0 - theta.cos()) / theta2, (theta - theta.sin()) / (theta2 * theta))
    };
    let k = skew(w);
    Matrix3::identity() - k * a + k * k * b
}

/// Maps a rotation vector onto the principal branch (norm at most π) without
/// changing the rotation it represents.
pub fn wrap_principal(w: &Vector3<f64>) -> Vector3<f64> {
    let theta = w.norm();
    if theta <= std::f64::consts::PI {
        return *w;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let reduced = theta % two_pi;
    let axis = w / theta;
    if reduced > std::f64::consts::PI {
        axis * (reduced - two_pi)
    } else {
        axis * reduced
    }
}
