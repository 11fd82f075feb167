//! Cameras, the procedural room and the placement of posed avatars.

mod camera;
mod environment;

pub use camera::{make_dome_cameras, Camera, Projection, RingConfig, DEFAULT_FOCAL, DEFAULT_HEIGHT, DEFAULT_WIDTH};
pub use environment::{EnvTriangle, Environment, EnvironmentConfig};

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::Vector3;
use rand::Rng;
use thiserror::Error;

use crate::body_model::rotation::wrap_principal;
use crate::body_model::{pose_mesh, AvatarTemplate, BodyModelError, PoseParams, PosedMesh, ShapeParams};
use crate::scanning::LabelTexture;
use crate::seed::SeedStream;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("camera {0}: {1}")]
    Camera(String, String),
    #[error("environment: {0}")]
    Environment(String),
    #[error("instance ids must be unique and non-zero, got {0:?}")]
    InstanceIds(Vec<u8>),
    #[error("avatar {instance}: {source}")]
    Avatar { instance: u8, source: BodyModelError },
}

/// One avatar placed in the scene.
#[derive(Debug, Clone)]
pub struct AvatarInstance {
    /// Non-zero; 0 is the background.
    pub instance_id: u8,
    pub template: Arc<AvatarTemplate>,
    pub shape: ShapeParams,
    pub pose: PoseParams,
    pub labels: Arc<LabelTexture>,
}

/// Immutable scene snapshot with every avatar already posed.
#[derive(Debug, Clone)]
pub struct SceneGraph {
    environment: Option<Environment>,
    avatars: Vec<AvatarInstance>,
    posed: Vec<PosedMesh>,
}

impl SceneGraph {
    pub fn new(environment: Option<Environment>, avatars: Vec<AvatarInstance>) -> Result<SceneGraph, SceneError> {
        if let Some(env) = &environment {
            env.validate()?;
        }
        let ids: Vec<u8> = avatars.iter().map(|a| a.instance_id).collect();
        let unique: BTreeSet<u8> = ids.iter().copied().collect();
        if unique.len() != ids.len() || unique.contains(&0) {
            return Err(SceneError::InstanceIds(ids));
        }
        let posed = avatars
            .iter()
            .map(|a| {
                a.shape
                    .validate()
                    .and_then(|_| a.pose.validate())
                    .and_then(|_| pose_mesh(&a.template, &a.shape, &a.pose))
            })
            .zip(&avatars)
            .map(|(r, a)| r.map_err(|source| SceneError::Avatar { instance: a.instance_id, source }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SceneGraph { environment, avatars, posed })
    }

    pub fn environment(&self) -> Option<&Environment> {
        self.environment.as_ref()
    }

    pub fn avatars(&self) -> &[AvatarInstance] {
        &self.avatars
    }

    /// Posed meshes, parallel to [`avatars`](Self::avatars).
    pub fn posed(&self) -> &[PosedMesh] {
        &self.posed
    }

    /// The same avatars without the room.
    pub fn without_environment(&self) -> SceneGraph {
        SceneGraph { environment: None, ..self.clone() }
    }

    /// The room alone.
    pub fn environment_only(&self) -> SceneGraph {
        SceneGraph { environment: self.environment.clone(), avatars: Vec::new(), posed: Vec::new() }
    }
}

/// Adds uniform noise in `[-magnitude, magnitude]³` to the rotations of the
/// `distal` joints only. The result is wrapped back onto the principal
/// branch.
pub fn perturb_distal_joints(pose: &PoseParams, distal: &[usize], magnitude: f64, seed: SeedStream) -> PoseParams {
    if magnitude <= 0.0 {
        return pose.clone();
    }
    let mut rng = seed.rng();
    let mut out = pose.clone();
    for &j in distal {
        if j >= out.axis_angles.len() {
            continue;
        }
        let noise = Vector3::from([0, 1, 2].map(|_| rng.random_range(-magnitude..=magnitude)));
        let w = wrap_principal(&(Vector3::from(out.axis_angles[j]) + noise));
        out.axis_angles[j] = [w.x, w.y, w.z];
    }
    out
}
