//! Evaluation of dense predictions: joints from UV via a joint texture map,
//! skeleton matching, PCK curves and depth metrics.

mod joints;
mod matching;
mod metrics;

pub use joints::{extract_joints_2d, JointDisc, JointTextureMap, DEFAULT_DISC_RADIUS};
pub use matching::{
    admissible_costs, hungarian, match_skeletons, skeleton_distance, MatchResult, DEFAULT_MATCH_THRESHOLD,
};
pub use metrics::{
    depth_metrics, matched_joint_errors, pck, pck_from_errors, sample_depth, DepthMetrics, PckCurve, SkeletonDepth,
};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::Camera;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("joint texture map: {0}")]
    JointMap(String),
    #[error("no evaluable joints")]
    NothingToEvaluate,
}

/// 2D joints of one person; `None` marks undetected joints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skeleton2d {
    pub id: u8,
    pub joints: Vec<Option<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthSkeleton {
    pub id: u8,
    /// World positions (m).
    pub joints: Vec<[f64; 3]>,
    pub visible: Vec<bool>,
}

impl GroundTruthSkeleton {
    /// Projections of the visible joints.
    pub fn project(&self, camera: &Camera) -> Skeleton2d {
        Skeleton2d {
            id: self.id,
            joints: self
                .joints
                .iter()
                .zip(&self.visible)
                .map(|(p, &vis)| {
                    if !vis {
                        return None;
                    }
                    camera.project(&Vector3::from(*p)).map(|q| [q.u, q.v])
                })
                .collect(),
        }
    }
}

/// Predicted channels of one frame.
#[derive(Debug, Clone, Copy)]
pub struct Prediction<'a> {
    pub width: u32,
    pub height: u32,
    pub u_q: &'a [u8],
    pub v_q: &'a [u8],
    pub instance: &'a [u8],
    pub depth_m: &'a [f64],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// PCK thresholds (px).
    pub thresholds: Vec<f64>,
    pub match_threshold: f64,
    /// Relative depth thresholds (m).
    pub depth_thresholds: Vec<f64>,
    pub disc_radius: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            thresholds: (1..=20).map(f64::from).collect(),
            match_threshold: DEFAULT_MATCH_THRESHOLD,
            depth_thresholds: (1..=20).map(|k| k as f64 * 0.01).collect(),
            disc_radius: DEFAULT_DISC_RADIUS,
        }
    }
}

/// Raw per-frame quantities, pooled across frames by [`EvalReport`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameEvaluation {
    pub ground_truth: usize,
    pub predicted: usize,
    pub matched: usize,
    pub joint_errors: Vec<f64>,
    pub relative_depth_errors: Vec<f64>,
    pub com_abs_errors: Vec<f64>,
    pub depth_excluded: usize,
}

pub fn evaluate_frame(
    prediction: &Prediction,
    ground_truth: &[GroundTruthSkeleton],
    camera: &Camera,
    map: &JointTextureMap,
    config: &EvalConfig,
) -> Result<FrameEvaluation, EvalError> {
    let gt2d: Vec<Skeleton2d> = ground_truth.iter().map(|g| g.project(camera)).collect();
    evaluate_frame_against(prediction, &gt2d, ground_truth, camera, map, config)
}

/// Like [`evaluate_frame`] with explicit 2D reference skeletons, parallel to
/// `ground_truth`, in place of the projected joints.
pub fn evaluate_frame_against(
    prediction: &Prediction,
    gt2d: &[Skeleton2d],
    ground_truth: &[GroundTruthSkeleton],
    camera: &Camera,
    map: &JointTextureMap,
    config: &EvalConfig,
) -> Result<FrameEvaluation, EvalError> {
    if gt2d.len() != ground_truth.len() {
        return Err(EvalError::Dimension(format!(
            "{} reference skeletons for {} ground-truth skeletons",
            gt2d.len(),
            ground_truth.len()
        )));
    }
    let predicted = extract_joints_2d(
        prediction.width,
        prediction.height,
        prediction.u_q,
        prediction.v_q,
        prediction.instance,
        map,
    )?;
    let matching = match_skeletons(&predicted, gt2d, config.match_threshold);
    let depth =
        depth_metrics(prediction.depth_m, prediction.width, prediction.height, ground_truth, camera, &matching)?;
    Ok(FrameEvaluation {
        ground_truth: ground_truth.len(),
        predicted: predicted.len(),
        matched: matching.pairs.len(),
        joint_errors: matched_joint_errors(&predicted, gt2d, &matching),
        relative_depth_errors: depth.relative_errors(),
        com_abs_errors: depth.skeletons.iter().map(|s| s.com_abs_error).collect(),
        depth_excluded: depth.excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub frames: usize,
    /// `None` when no joint could be evaluated.
    pub pck: Option<PckCurve>,
    pub relative_depth: Option<PckCurve>,
    pub com_abs_error_mean: Option<f64>,
    pub detection_rate: f64,
    pub ground_truth_skeletons: usize,
    pub predicted_skeletons: usize,
    pub matched_skeletons: usize,
    pub depth_excluded: usize,
}

impl EvalReport {
    pub fn from_frames(frames: &[FrameEvaluation], config: &EvalConfig) -> EvalReport {
        let pool = |f: fn(&FrameEvaluation) -> &Vec<f64>| {
            frames.iter().flat_map(|e| f(e).iter().copied()).collect::<Vec<f64>>()
        };
        let errors = pool(|e| &e.joint_errors);
        let relative = pool(|e| &e.relative_depth_errors);
        let com = pool(|e| &e.com_abs_errors);
        let gt: usize = frames.iter().map(|e| e.ground_truth).sum();
        let matched: usize = frames.iter().map(|e| e.matched).sum();
        EvalReport {
            frames: frames.len(),
            pck: pck_from_errors(&errors, &config.thresholds).ok(),
            relative_depth: pck_from_errors(&relative, &config.depth_thresholds).ok(),
            com_abs_error_mean: (!com.is_empty()).then(|| com.iter().sum::<f64>() / com.len() as f64),
            detection_rate: if gt == 0 { 0.0 } else { matched as f64 / gt as f64 },
            ground_truth_skeletons: gt,
            predicted_skeletons: frames.iter().map(|e| e.predicted).sum(),
            matched_skeletons: matched,
            depth_excluded: frames.iter().map(|e| e.depth_excluded).sum(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `metric,threshold,value` rows for both curves.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,threshold,value\n");
        for (name, curve) in [("pck_px", &self.pck), ("relative_depth_m", &self.relative_depth)] {
            if let Some(c) = curve {
                for (t, v) in c.thresholds.iter().zip(&c.values) {
                    out.push_str(&format!("{name},{t},{v}\n"));
                }
            }
        }
        out
    }
}
