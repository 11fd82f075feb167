//! Parametric humanoid: shape blendshapes, joint regression and linear blend
//! skinning.
//!
//! A template is a canonical T-posed mesh in a z-up, meters frame with the
//! avatar facing −y. Shape coefficients displace its vertices linearly, a
//! sparse regressor maps vertices to rest joints, and per-joint axis-angle
//! rotations composed along the kinematic tree pose both joints and skin.

mod builder;
mod kinematics;
pub mod rotation;
mod template;

pub use builder::{build_canonical_avatar, AvatarBuildConfig, SkeletonLayout};
pub use kinematics::{apply_shape, joint_jacobian, joint_positions, pose_mesh, rest_joints, JointJacobian};
pub use template::{Atlas, AvatarTemplate, BodyRegion, Chart, SkinInfluence};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Blendshape coefficients are rejected outside `[-SHAPE_BOUND, SHAPE_BOUND]`.
pub const SHAPE_BOUND: f64 = 5.0;

#[derive(Debug, Error, PartialEq)]
pub enum BodyModelError {
    #[error("invalid avatar configuration: {0}")]
    Config(String),
    #[error("invalid avatar template: {0}")]
    Template(String),
    #[error("dimension mismatch: expected {expected} {what}, got {got}")]
    Dimension { what: &'static str, expected: usize, got: usize },
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("shape coefficient {index} = {value} outside the sanity bound ±{SHAPE_BOUND}")]
    ShapeOutOfBounds { index: usize, value: f64 },
    #[error("rotation vector of joint {joint} has norm {norm} >= π")]
    RotationRange { joint: usize, norm: f64 },
    #[error("template json: {0}")]
    Json(String),
}

/// Blendshape coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub beta: Vec<f64>,
}

impl ShapeParams {
    pub fn new(beta: Vec<f64>) -> Result<Self, BodyModelError> {
        let shape = ShapeParams { beta };
        shape.validate()?;
        Ok(shape)
    }

    pub fn zeros(m: usize) -> Self {
        ShapeParams { beta: vec![0.0; m] }
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn validate(&self) -> Result<(), BodyModelError> {
        for (index, &value) in self.beta.iter().enumerate() {
            if !value.is_finite() {
                return Err(BodyModelError::NonFinite("shape coefficient"));
            }
            if value.abs() > SHAPE_BOUND {
                return Err(BodyModelError::ShapeOutOfBounds { index, value });
            }
        }
        Ok(())
    }
}

/// Per-joint axis-angle rotations plus a root translation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseParams {
    pub axis_angles: Vec<[f64; 3]>,
    pub root_translation: [f64; 3],
}

impl PoseParams {
    pub fn identity(n: usize) -> Self {
        PoseParams { axis_angles: vec![[0.0; 3]; n], root_translation: [0.0; 3] }
    }

    pub fn joint_count(&self) -> usize {
        self.axis_angles.len()
    }

    pub fn rotation(&self, joint: usize) -> Vector3<f64> {
        Vector3::from(self.axis_angles[joint])
    }

    pub fn translation(&self) -> Vector3<f64> {
        Vector3::from(self.root_translation)
    }

    /// Squared norm of the rotation part; the root translation is not part of
    /// the pose prior.
    pub fn rotation_norm_squared(&self) -> f64 {
        self.axis_angles.iter().map(|w| w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sum()
    }

    pub fn validate(&self) -> Result<(), BodyModelError> {
        for (joint, w) in self.axis_angles.iter().enumerate() {
            if w.iter().any(|c| !c.is_finite()) {
                return Err(BodyModelError::NonFinite("rotation vector"));
            }
            let norm = Vector3::from(*w).norm();
            if norm >= std::f64::consts::PI {
                return Err(BodyModelError::RotationRange { joint, norm });
            }
        }
        if self.root_translation.iter().any(|c| !c.is_finite()) {
            return Err(BodyModelError::NonFinite("root translation"));
        }
        Ok(())
    }
}

/// Skinned vertices and posed joint origins.
#[derive(Debug, Clone, PartialEq)]
pub struct PosedMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub joints: Vec<Vector3<f64>>,
}
