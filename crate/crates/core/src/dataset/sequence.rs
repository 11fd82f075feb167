use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SequenceError;
use crate::body_model::AvatarTemplate;
use crate::retarget::{JointMap, SkeletonFrame};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFrame {
    /// Seconds.
    pub t: f64,
    /// Meters, one row per joint name.
    pub joints: Vec<[f64; 3]>,
    /// In `[0, 1]`; 0 marks a missing joint.
    pub confidence: Vec<f64>,
}

/// One subject's skeleton track as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkeletonSequenceFile {
    pub subject_id: String,
    pub joint_names: Vec<String>,
    pub frames: Vec<SequenceFrame>,
}

/// A validated sequence resolved against an avatar's joints.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSequence {
    pub file: SkeletonSequenceFile,
    pub joint_map: JointMap,
    /// Frames in avatar joint order.
    pub frames: Vec<SkeletonFrame>,
}

impl SkeletonSequenceFile {
    /// Avatar-order frames written out under the avatar's own joint names.
    pub fn from_frames(subject_id: &str, template: &AvatarTemplate, frames: &[SkeletonFrame]) -> SkeletonSequenceFile {
        SkeletonSequenceFile {
            subject_id: subject_id.to_string(),
            joint_names: template.joint_names.clone(),
            frames: frames
                .iter()
                .map(|f| SequenceFrame { t: f.timestamp, joints: f.joints.clone(), confidence: f.confidence.clone() })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sequence serializes")
    }

    /// Structural checks; errors name the offending field.
    pub fn validate(&self, origin: &str) -> Result<(), SequenceError> {
        let schema =
            |field: String, message: String| SequenceError::Schema { path: origin.to_string(), field, message };
        if self.subject_id.is_empty() {
            return Err(schema("subject_id".into(), "must not be empty".into()));
        }
        let n = self.joint_names.len();
        if n == 0 {
            return Err(schema("joint_names".into(), "must not be empty".into()));
        }
        if self.frames.is_empty() {
            return Err(schema("frames".into(), "must contain at least one frame".into()));
        }
        for (i, f) in self.frames.iter().enumerate() {
            if f.joints.len() != n {
                return Err(schema(
                    format!("frames[{i}].joints"),
                    format!("{} rows for {n} joint names", f.joints.len()),
                ));
            }
            if f.confidence.len() != n {
                return Err(schema(
                    format!("frames[{i}].confidence"),
                    format!("{} values for {n} joint names", f.confidence.len()),
                ));
            }
            if !f.t.is_finite() {
                return Err(schema(format!("frames[{i}].t"), "must be finite".into()));
            }
            if let Some(j) = f.confidence.iter().position(|c| !(0.0..=1.0).contains(c)) {
                return Err(schema(format!("frames[{i}].confidence[{j}]"), "must lie in [0, 1]".into()));
            }
            if let Some(j) =
                f.joints.iter().zip(&f.confidence).position(|(p, &c)| c > 0.0 && p.iter().any(|x| !x.is_finite()))
            {
                return Err(schema(format!("frames[{i}].joints[{j}]"), "must be finite".into()));
            }
            if i > 0 && !(f.t > self.frames[i - 1].t) {
                return Err(SequenceError::NonMonotone {
                    path: origin.to_string(),
                    frame: i,
                    t: f.t,
                    previous: self.frames[i - 1].t,
                });
            }
        }
        Ok(())
    }

    pub fn resolve(self, template: &AvatarTemplate, origin: &str) -> Result<LoadedSequence, SequenceError> {
        self.validate(origin)?;
        let joint_map = JointMap::from_names(template, &self.joint_names)
            .map_err(|e| SequenceError::UnknownJoints { path: origin.to_string(), names: e.names })?;
        let frames = self.frames.iter().map(|f| joint_map.apply(&f.joints, &f.confidence, f.t)).collect();
        Ok(LoadedSequence { file: self, joint_map, frames })
    }
}

/// Parses one sequence object or an array of them.
pub fn parse_skeleton_sequences(
    text: &str,
    origin: &str,
    template: &AvatarTemplate,
) -> Result<Vec<LoadedSequence>, SequenceError> {
    let parse_error = |e: serde_json::Error| SequenceError::Parse {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    };
    // dispatch on the first token so parse errors keep their position
    let files: Vec<SkeletonSequenceFile> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(parse_error)?
    } else {
        vec![serde_json::from_str(text).map_err(parse_error)?]
    };
    if files.is_empty() {
        return Err(SequenceError::Schema {
            path: origin.to_string(),
            field: "(root)".into(),
            message: "no sequences".into(),
        });
    }
    files.into_iter().map(|f| f.resolve(template, origin)).collect()
}

pub fn load_skeleton_sequences(path: &Path, template: &AvatarTemplate) -> Result<Vec<LoadedSequence>, SequenceError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| SequenceError::Io { path: origin.clone(), source })?;
    parse_skeleton_sequences(&text, &origin, template)
}
