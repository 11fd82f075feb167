use serde::{Deserialize, Serialize};

use super::{EvalError, GroundTruthSkeleton, MatchResult, Skeleton2d};
use crate::scene::Camera;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PckCurve {
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
    /// Joints evaluated.
    pub count: usize,
}

/// Fraction of `errors` at or below each threshold.
pub fn pck_from_errors(errors: &[f64], thresholds: &[f64]) -> Result<PckCurve, EvalError> {
    if errors.is_empty() {
        return Err(EvalError::NothingToEvaluate);
    }
    if let Some(t) = thresholds.iter().find(|t| !(**t >= 0.0)) {
        return Err(EvalError::Argument(format!("threshold {t} must be non-negative")));
    }
    let values =
        thresholds.iter().map(|&t| errors.iter().filter(|&&e| e <= t).count() as f64 / errors.len() as f64).collect();
    Ok(PckCurve { thresholds: thresholds.to_vec(), values, count: errors.len() })
}

/// Pixel errors of joints detected in the prediction and present in the
/// matched ground truth.
pub fn matched_joint_errors(predicted: &[Skeleton2d], ground_truth: &[Skeleton2d], matching: &MatchResult) -> Vec<f64> {
    let mut errors = Vec::new();
    for &(p, g) in &matching.pairs {
        let (Some(p), Some(g)) = (predicted.iter().find(|s| s.id == p), ground_truth.iter().find(|s| s.id == g)) else {
            continue;
        };
        for (a, b) in p.joints.iter().zip(&g.joints) {
            if let (Some(a), Some(b)) = (a, b) {
                errors.push(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
    }
    errors
}

pub fn pck(
    predicted: &[Skeleton2d],
    ground_truth: &[Skeleton2d],
    matching: &MatchResult,
    thresholds: &[f64],
) -> Result<PckCurve, EvalError> {
    pck_from_errors(&matched_joint_errors(predicted, ground_truth, matching), thresholds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonDepth {
    pub ground_truth_id: u8,
    pub com_abs_error: f64,
    /// Per joint; `None` for joints not evaluated.
    pub relative_errors: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthMetrics {
    pub skeletons: Vec<SkeletonDepth>,
    /// Visible joints whose pixel and neighborhood had no depth.
    pub excluded: usize,
}

impl DepthMetrics {
    pub fn is_empty(&self) -> bool {
        self.skeletons.is_empty()
    }

    pub fn relative_errors(&self) -> Vec<f64> {
        self.skeletons.iter().flat_map(|s| s.relative_errors.iter().flatten().copied()).collect()
    }
}

/// Depths are compared in whole micrometers so that shifting every
/// prediction by a constant leaves relative errors bit-identical.
fn micrometers(d: f64) -> i64 {
    (d * 1e6).round() as i64
}

/// Depth at pixel `(x, y)`, or the median of the non-empty 3×3
/// neighborhood when the pixel itself is empty.
pub fn sample_depth(depth_m: &[f64], width: u32, height: u32, x: u32, y: u32) -> Option<f64> {
    let at = |x: u32, y: u32| depth_m[y as usize * width as usize + x as usize];
    let d = at(x, y);
    if d > 0.0 {
        return Some(d);
    }
    let mut around = Vec::with_capacity(8);
    for dy in -1i64..=1 {
        for dx in -1i64..=1 {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx >= 0 && ny >= 0 && nx < width as i64 && ny < height as i64 {
                let d = at(nx as u32, ny as u32);
                if d > 0.0 {
                    around.push(d);
                }
            }
        }
    }
    if around.is_empty() {
        return None;
    }
    around.sort_by(f64::total_cmp);
    Some(around[(around.len() - 1) / 2])
}

/// Center-of-mass absolute and per-joint relative depth errors of the
/// matched ground-truth skeletons, reading predictions at the ground-truth
/// joint pixels.
pub fn depth_metrics(
    depth_m: &[f64],
    width: u32,
    height: u32,
    ground_truth: &[GroundTruthSkeleton],
    camera: &Camera,
    matching: &MatchResult,
) -> Result<DepthMetrics, EvalError> {
    if depth_m.len() != width as usize * height as usize {
        return Err(EvalError::Dimension(format!("{} depth values for {width}x{height}", depth_m.len())));
    }
    let mut out = DepthMetrics { skeletons: Vec::new(), excluded: 0 };
    for &(_, gid) in &matching.pairs {
        let Some(gt) = ground_truth.iter().find(|s| s.id == gid) else { continue };
        // (joint, predicted µm, true µm)
        let mut samples = Vec::new();
        for (j, (p, &visible)) in gt.joints.iter().zip(&gt.visible).enumerate() {
            if !visible {
                continue;
            }
            let Some(q) = camera.project(&nalgebra::Vector3::from(*p)) else { continue };
            if !(q.u >= 0.0 && q.v >= 0.0 && q.u < width as f64 && q.v < height as f64) {
                continue;
            }
            match sample_depth(depth_m, width, height, q.u as u32, q.v as u32) {
                Some(d) => samples.push((j, micrometers(d), micrometers(q.depth))),
                None => out.excluded += 1,
            }
        }
        if samples.is_empty() {
            continue;
        }
        let n = samples.len() as i64;
        let pred_sum: i64 = samples.iter().map(|s| s.1).sum();
        let true_sum: i64 = samples.iter().map(|s| s.2).sum();
        let mut relative_errors = vec![None; gt.joints.len()];
        for &(j, p, t) in &samples {
            // n·(x_j − mean) stays integral
            let diff = (n * p - pred_sum) - (n * t - true_sum);
            relative_errors[j] = Some(diff.abs() as f64 / n as f64 * 1e-6);
        }
        out.skeletons.push(SkeletonDepth {
            ground_truth_id: gid,
            com_abs_error: (pred_sum - true_sum).abs() as f64 / n as f64 * 1e-6,
            relative_errors,
        });
    }
    Ok(out)
}
