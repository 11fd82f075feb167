use serde::{Deserialize, Serialize};

use crate::body_model::{PoseParams, ShapeParams};
use crate::raster::{DepthQuantizer, JointRecord};
use crate::scene::Camera;

pub const META_FORMAT_VERSION: u32 = 1;

/// JSON Schema of `meta.json`.
pub const META_SCHEMA: &str = include_str!("../../schema/meta.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvatarMeta {
    pub instance_id: u8,
    pub subject_id: String,
    pub shape: ShapeParams,
    pub pose: PoseParams,
    pub joint_names: Vec<String>,
    pub joints: Vec<JointRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedInfo {
    pub root: u64,
    /// Stream this frame's randomness was drawn from.
    pub frame: u64,
}

/// Contents of a bundle's `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameMeta {
    pub format_version: u32,
    pub frame_index: usize,
    pub timestamp: f64,
    pub width: u32,
    pub height: u32,
    pub camera: Camera,
    pub depth_quantizer: DepthQuantizer,
    pub avatars: Vec<AvatarMeta>,
    pub seeds: SeedInfo,
    pub files: Vec<String>,
}

impl FrameMeta {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("meta serializes")
    }

    pub fn from_json(text: &str) -> Result<FrameMeta, String> {
        let meta: FrameMeta = serde_json::from_str(text).map_err(|e| e.to_string())?;
        meta.validate()?;
        Ok(meta)
    }

    /// Semantic checks beyond the typed structure.
    pub fn validate(&self) -> Result<(), String> {
        if self.format_version != META_FORMAT_VERSION {
            return Err(format!("format_version {} is not {META_FORMAT_VERSION}", self.format_version));
        }
        if self.width != self.camera.width || self.height != self.camera.height {
            return Err("frame size differs from the camera resolution".into());
        }
        self.camera.validate().map_err(|e| e.to_string())?;
        self.depth_quantizer.validate().map_err(|e| e.to_string())?;
        let mut ids: Vec<u8> = self.avatars.iter().map(|a| a.instance_id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.avatars.len() || ids.first() == Some(&0) {
            return Err("instance ids must be unique and non-zero".into());
        }
        for a in &self.avatars {
            let n = a.joint_names.len();
            if a.joints.len() != n || a.pose.axis_angles.len() != n {
                return Err(format!(
                    "avatar {}: {} names, {} joints, {} rotations",
                    a.instance_id,
                    n,
                    a.joints.len(),
                    a.pose.axis_angles.len()
                ));
            }
            a.shape.validate().map_err(|e| format!("avatar {}: {e}", a.instance_id))?;
            a.pose.validate().map_err(|e| format!("avatar {}: {e}", a.instance_id))?;
            for j in &a.joints {
                let finite = j.position.iter().all(|x| x.is_finite())
                    && j.pixel.is_none_or(|p| p.iter().all(|x| x.is_finite()))
                    && j.depth.is_none_or(|d| d > 0.0);
                if !finite || (j.visible && j.pixel.is_none()) {
                    return Err(format!("avatar {}: inconsistent joint record", a.instance_id));
                }
            }
        }
        Ok(())
    }
}
