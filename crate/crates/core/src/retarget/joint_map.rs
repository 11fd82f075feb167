use std::collections::BTreeSet;

use thiserror::Error;

use super::SkeletonFrame;
use crate::body_model::AvatarTemplate;

/// Names recognised on top of the avatar's own joint names. `None` marks
/// keypoints that exist in common capture conventions but have no avatar
/// counterpart.
const ALIASES: &[(&str, Option<&str>)] = &[
    ("BodyCenter", Some("pelvis")),
    ("MidHip", Some("pelvis")),
    ("Pelvis", Some("pelvis")),
    ("Spine", Some("spine")),
    ("Chest", Some("chest")),
    ("Neck", Some("neck")),
    ("Head", Some("head")),
    ("HeadTop", None),
    ("Nose", None),
    ("lEye", None),
    ("rEye", None),
    ("lEar", None),
    ("rEar", None),
    ("lShoulder", Some("l_shoulder")),
    ("lElbow", Some("l_elbow")),
    ("lWrist", Some("l_wrist")),
    ("lHand", Some("l_hand")),
    ("rShoulder", Some("r_shoulder")),
    ("rElbow", Some("r_elbow")),
    ("rWrist", Some("r_wrist")),
    ("rHand", Some("r_hand")),
    ("lHip", Some("l_hip")),
    ("lKnee", Some("l_knee")),
    ("lAnkle", Some("l_ankle")),
    ("rHip", Some("r_hip")),
    ("rKnee", Some("r_knee")),
    ("rAnkle", Some("r_ankle")),
];

#[derive(Debug, Clone, Error, PartialEq)]
#[error("unknown joint names: {}", names.join(", "))]
pub struct UnknownJoints {
    pub names: Vec<String>,
}

/// Index map from an external skeleton convention to avatar joints.
#[derive(Debug, Clone, PartialEq)]
pub struct JointMap {
    /// For every avatar joint, the source column it reads from.
    pub source_of: Vec<Option<usize>>,
    pub source_len: usize,
}

impl JointMap {
    pub fn from_names<S: AsRef<str>>(template: &AvatarTemplate, source_names: &[S]) -> Result<Self, UnknownJoints> {
        let mut source_of = vec![None; template.joint_count()];
        let mut unknown = Vec::new();
        let mut seen = BTreeSet::new();
        for (col, name) in source_names.iter().enumerate() {
            let name = name.as_ref();
            let target = match template.joint_index(name) {
                Some(j) => Some(j),
                None => match ALIASES.iter().find(|(alias, _)| *alias == name) {
                    Some((_, Some(target))) => template.joint_index(target),
                    Some((_, None)) => None,
                    None => {
                        unknown.push(name.to_string());
                        continue;
                    }
                },
            };
            if let Some(j) = target {
                // first column wins when two names map to one joint
                if seen.insert(j) {
                    source_of[j] = Some(col);
                }
            }
        }
        if !unknown.is_empty() {
            return Err(UnknownJoints { names: unknown });
        }
        Ok(JointMap { source_of, source_len: source_names.len() })
    }

    pub fn identity(n: usize) -> Self {
        JointMap { source_of: (0..n).map(Some).collect(), source_len: n }
    }

    pub fn mapped_count(&self) -> usize {
        self.source_of.iter().filter(|s| s.is_some()).count()
    }

    /// Reorders a source-convention frame into avatar order; unmapped avatar
    /// joints get confidence 0.
    pub fn apply(&self, joints: &[[f64; 3]], confidence: &[f64], timestamp: f64) -> SkeletonFrame {
        let mut out = SkeletonFrame {
            joints: vec![[0.0; 3]; self.source_of.len()],
            confidence: vec![0.0; self.source_of.len()],
            timestamp,
        };
        for (j, src) in self.source_of.iter().enumerate() {
            if let Some(c) = *src {
                out.joints[j] = joints[c];
                out.confidence[j] = confidence[c];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body_model::{build_canonical_avatar, AvatarBuildConfig};

    #[test]
    fn aliases_and_unknowns() {
        let t = build_canonical_avatar(&AvatarBuildConfig::default()).unwrap();
        let map = JointMap::from_names(&t, &["Nose", "lElbow", "pelvis"]).unwrap();
        assert_eq!(map.source_of[t.joint_index("l_elbow").unwrap()], Some(1));
        assert_eq!(map.source_of[0], Some(2));
        assert_eq!(map.mapped_count(), 2);
        let frame = map.apply(&[[9.0; 3], [1.0, 2.0, 3.0], [0.0, 0.0, 1.0]], &[1.0, 0.5, 1.0], 0.0);
        assert_eq!(frame.confidence.iter().filter(|&&c| c > 0.0).count(), 2);

        let err = JointMap::from_names(&t, &["lElbow", "tail", "wing"]).unwrap_err();
        assert_eq!(err.names, vec!["tail".to_string(), "wing".to_string()]);
    }
}
