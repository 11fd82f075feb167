//! Retargeting observed 3D skeletons onto the parametric avatar.
//!
//! Shape is recovered from a handful of sampled frames by alternating pose and
//! shape blocks; the full sequence is then fitted frame by frame with the
//! shape fixed, each frame warm-started from its predecessor.

mod fit;
mod joint_map;
mod lm;

pub use fit::{
    fit_pose, fit_sequence, fit_sequence_with, fit_shape, joint_discrepancy, sample_frames, FrameFit, PoseFit,
    SequenceFitter, SequenceInit, ShapeFit,
};
pub use joint_map::{JointMap, UnknownJoints};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::body_model::{BodyModelError, PoseParams, ShapeParams};

/// Frames with fewer confident joints are not fitted.
pub const MIN_CONFIDENT_JOINTS: usize = 4;

/// One observation of the avatar's joints, already in avatar joint order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonFrame {
    pub joints: Vec<[f64; 3]>,
    pub confidence: Vec<f64>,
    pub timestamp: f64,
}

impl SkeletonFrame {
    pub fn new(joints: Vec<[f64; 3]>, timestamp: f64) -> Self {
        let confidence = vec![1.0; joints.len()];
        SkeletonFrame { joints, confidence, timestamp }
    }

    pub fn confident_count(&self) -> usize {
        self.confidence.iter().filter(|&&c| c > 0.0).count()
    }

    pub fn validate(&self, joint_count: usize) -> Result<(), FitError> {
        if self.joints.len() != joint_count || self.confidence.len() != joint_count {
            return Err(FitError::Dimension {
                expected: joint_count,
                got: self.joints.len().min(self.confidence.len()),
            });
        }
        for (i, (&c, p)) in self.confidence.iter().zip(&self.joints).enumerate() {
            if !(0.0..=1.0).contains(&c) {
                return Err(FitError::Argument(format!("confidence of joint {i} is {c}")));
            }
            if c > 0.0 && p.iter().any(|x| !x.is_finite()) {
                return Err(FitError::Argument(format!("joint {i} is confident but not finite")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampingSchedule {
    pub initial: f64,
    pub up: f64,
    pub down: f64,
}

impl Default for DampingSchedule {
    fn default() -> Self {
        DampingSchedule { initial: 1e-3, up: 10.0, down: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimConfig {
    /// Weight of the shape prior `α‖β‖²`.
    pub alpha: f64,
    /// Weight of the pose prior `γ‖p‖²` (rotations only).
    pub gamma: f64,
    /// Frames sampled for shape fitting.
    pub k_samples: usize,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub damping: DampingSchedule,
    /// Pose/shape alternations during shape fitting.
    pub max_alternations: usize,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            alpha: 1e-3,
            gamma: 1e-3,
            k_samples: 8,
            max_iterations: 100,
            gradient_tolerance: 1e-9,
            damping: DampingSchedule::default(),
            max_alternations: 20,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<(), FitError> {
        let ok = self.alpha >= 0.0
            && self.gamma >= 0.0
            && self.k_samples >= 1
            && self.max_iterations >= 1
            && self.gradient_tolerance > 0.0
            && self.damping.initial > 0.0
            && self.damping.up > 1.0
            && self.damping.down > 0.0
            && self.damping.down < 1.0
            && self.max_alternations >= 1;
        if ok {
            Ok(())
        } else {
            Err(FitError::Argument(format!("invalid optimizer configuration {self:?}")))
        }
    }
}

/// Shape and per-frame poses of one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub shape: ShapeParams,
    pub poses: Vec<PoseParams>,
    /// Final joint discrepancy per frame (m²).
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
    /// Frames with too few confident joints; their pose is copied from the
    /// previous frame.
    #[serde(default)]
    pub unfit_frames: Vec<usize>,
}

impl FitResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit result serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("expected {expected} joints, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("optimization diverged{}", frame.map(|f| format!(" at frame {f}")).unwrap_or_default())]
    Divergence { frame: Option<usize>, last_pose: Option<Box<PoseParams>>, last_shape: Option<ShapeParams> },
    #[error(transparent)]
    Model(#[from] BodyModelError),
}
