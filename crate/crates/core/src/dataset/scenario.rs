use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::body_model::{build_canonical_avatar, AvatarBuildConfig};
use crate::raster::{DepthQuantizer, Light};
use crate::retarget::OptimConfig;
use crate::scanning::ScanConfig;
use crate::scene::{make_dome_cameras, Environment, EnvironmentConfig, RingConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubjectConfig {
    /// Skeleton sequence file, relative to the scenario file.
    pub sequence: PathBuf,
    /// Picks one sequence from a multi-subject file; the first otherwise.
    #[serde(default)]
    pub subject_id: Option<String>,
}

/// Where each avatar's texture labels come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LabelSource {
    /// The outfit derived from the atlas.
    GroundTruth,
    /// Virtual scanning of the outfit with a noisy labeler.
    Scan { views: usize, noise: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub subjects: Vec<SubjectConfig>,
    /// Caps the number of frames taken from the sequences.
    pub max_frames: Option<usize>,
    pub frame_stride: usize,
    pub cameras: RingConfig,
    pub environment: Option<EnvironmentConfig>,
    pub avatar: AvatarBuildConfig,
    pub optim: OptimConfig,
    pub labels: LabelSource,
    /// Uniform rotation noise on hands and feet (rad).
    pub distal_noise: f64,
    pub composite: bool,
    /// Background plates (PPM or PNG) by camera id, relative to the
    /// scenario file. Cameras without one get a procedural plate.
    pub backgrounds: BTreeMap<String, PathBuf>,
    pub depth_quantizer: DepthQuantizer,
    pub light: Light,
    pub shadows: bool,
    /// Adds wall-clock timings to the manifest, which then differs between
    /// runs.
    pub record_timings: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 0,
            subjects: Vec::new(),
            max_frames: None,
            frame_stride: 1,
            cameras: RingConfig::default(),
            environment: Some(EnvironmentConfig::default()),
            avatar: AvatarBuildConfig::default(),
            optim: OptimConfig::default(),
            labels: LabelSource::GroundTruth,
            distal_noise: 0.0,
            composite: false,
            backgrounds: BTreeMap::new(),
            depth_quantizer: DepthQuantizer::default(),
            light: Light::default(),
            shadows: true,
            record_timings: false,
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<ScenarioConfig, DatasetError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| DatasetError::Io { path: path.display().to_string(), source })?;
        serde_json::from_str(&text).map_err(|e| DatasetError::Validation(vec![format!("{}: {e}", path.display())]))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn scan_config(&self) -> Option<(ScanConfig, f64)> {
        match self.labels {
            LabelSource::GroundTruth => None,
            LabelSource::Scan { views, noise } => Some((ScanConfig { views, ..ScanConfig::default() }, noise)),
        }
    }

    /// Every problem found, so a broken scenario is reported in one pass.
    pub fn validate(&self, base_dir: &Path) -> Result<(), DatasetError> {
        let mut problems = Vec::new();
        if self.subjects.is_empty() {
            problems.push("subjects: at least one subject is required".to_string());
        }
        if self.subjects.len() > 255 {
            problems.push(format!("subjects: {} subjects exceed the 255 instance ids", self.subjects.len()));
        }
        for (i, s) in self.subjects.iter().enumerate() {
            let path = base_dir.join(&s.sequence);
            if !path.is_file() {
                problems.push(format!("subjects[{i}].sequence: {} does not exist", path.display()));
            }
        }
        if self.frame_stride == 0 {
            problems.push("frame_stride: must be at least 1".into());
        }
        if self.max_frames == Some(0) {
            problems.push("max_frames: must be at least 1".into());
        }
        if let Err(e) = make_dome_cameras(&self.cameras) {
            problems.push(format!("cameras: {e}"));
        }
        if self.cameras.width == 0 || self.cameras.height == 0 || !(self.cameras.focal > 0.0) {
            problems.push("cameras: resolution and focal length must be positive".into());
        }
        if let Some(env) = &self.environment {
            match Environment::octagon(env) {
                Ok(room) => {
                    if !room.contains_disc(self.cameras.radius) {
                        problems
                            .push(format!("cameras.radius: ring of radius {} leaves the room", self.cameras.radius));
                    }
                }
                Err(e) => problems.push(format!("environment: {e}")),
            }
        }
        if let Err(e) = build_canonical_avatar(&self.avatar) {
            problems.push(format!("avatar: {e}"));
        }
        if let Err(e) = self.optim.validate() {
            problems.push(format!("optim: {e}"));
        }
        if let LabelSource::Scan { views, noise } = self.labels {
            if views == 0 {
                problems.push("labels.views: must be at least 1".into());
            }
            if !(0.0..=1.0).contains(&noise) {
                problems.push(format!("labels.noise: {noise} outside [0, 1]"));
            }
        }
        if !(self.distal_noise >= 0.0 && self.distal_noise.is_finite()) {
            problems.push(format!("distal_noise: {} must be finite and non-negative", self.distal_noise));
        }
        if let Ok(cameras) = make_dome_cameras(&self.cameras) {
            for (id, plate) in &self.backgrounds {
                if !cameras.iter().any(|c| &c.id == id) {
                    problems.push(format!("backgrounds.{id}: no such camera"));
                }
                let path = base_dir.join(plate);
                if !path.is_file() {
                    problems.push(format!("backgrounds.{id}: {} does not exist", path.display()));
                }
            }
        }
        if let Err(e) = self.depth_quantizer.validate() {
            problems.push(format!("depth_quantizer: {e}"));
        }
        if !(0.0..=1.0).contains(&self.light.ambient) || self.light.direction.iter().all(|&d| d == 0.0) {
            problems.push("light: ambient must lie in [0, 1] and the direction must be non-zero".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(DatasetError::Validation(problems))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problems_are_aggregated() {
        let s = ScenarioConfig {
            frame_stride: 0,
            distal_noise: -1.0,
            subjects: vec![SubjectConfig { sequence: "missing.json".into(), subject_id: None }],
            ..Default::default()
        };
        match s.validate(Path::new("/nonexistent")) {
            Err(DatasetError::Validation(p)) => assert_eq!(p.len(), 3, "{p:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"seed": 1, "colour": 2}"#).is_err());
        let s: ScenarioConfig =
            serde_json::from_str(r#"{"labels": {"kind": "scan", "views": 4, "noise": 0.1}}"#).unwrap();
        assert_eq!(s.labels, LabelSource::Scan { views: 4, noise: 0.1 });
    }
}
