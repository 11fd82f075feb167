//! Synthetic subjects and motion: random shapes, smooth pose sequences and
//! the skeleton observations they induce.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::body_model::{joint_positions, AvatarTemplate, BodyModelError, PoseParams, ShapeParams};
use crate::retarget::SkeletonFrame;
use crate::seed::SeedStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotionConfig {
    pub frames: usize,
    pub fps: f64,
    /// Mean joint angle offset range (radians, per component).
    pub base_amplitude: f64,
    /// Oscillation amplitude range (radians, per component).
    pub swing_amplitude: f64,
    /// Oscillation frequency range (Hz).
    pub frequency: (f64, f64),
    /// Half-range of the initial heading (radians).
    pub yaw_range: f64,
    /// Half-range of the initial floor position (meters).
    pub position_range: f64,
    /// Walking speed range (m/s).
    pub speed: (f64, f64),
}

impl Default for MotionConfig {
    fn default() -> Self {
        MotionConfig {
            frames: 60,
            fps: 30.0,
            base_amplitude: 0.35,
            swing_amplitude: 0.35,
            frequency: (0.3, 0.9),
            yaw_range: PI / 2.0,
            position_range: 1.0,
            speed: (0.0, 0.6),
        }
    }
}

/// Uniform coefficients in `[-bound, bound]`.
pub fn random_shape(m: usize, bound: f64, rng: &mut impl Rng) -> ShapeParams {
    ShapeParams { beta: (0..m).map(|_| rng.random_range(-bound..=bound)).collect() }
}

fn root_pelvis_height(template: &AvatarTemplate, shape: &ShapeParams) -> f64 {
    // lift the body so the lowest ankle sits at its rest height
    let rest = crate::body_model::rest_joints(template, shape).expect("valid shape");
    let zero = crate::body_model::rest_joints(template, &ShapeParams::zeros(shape.len())).expect("valid shape");
    let lowest = rest.iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
    let lowest0 = zero.iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
    lowest0 - lowest
}

/// A single random pose with moderate joint angles.
pub fn random_pose(template: &AvatarTemplate, amplitude: f64, config: &MotionConfig, rng: &mut impl Rng) -> PoseParams {
    let n = template.joint_count();
    let mut pose = PoseParams::identity(n);
    for (j, w) in pose.axis_angles.iter_mut().enumerate() {
        if j == 0 {
            let tilt = 0.15;
            *w = [
                rng.random_range(-tilt..tilt),
                rng.random_range(-tilt..tilt),
                rng.random_range(-config.yaw_range..=config.yaw_range),
            ];
        } else {
            *w = [0, 1, 2].map(|_| rng.random_range(-amplitude..=amplitude));
        }
    }
    let r = config.position_range;
    pose.root_translation = [rng.random_range(-r..=r), rng.random_range(-r..=r), 0.0];
    pose
}

/// Smooth periodic motion: every joint oscillates around a random mean pose
/// while the root walks along its heading.
pub fn swing_sequence(
    template: &AvatarTemplate,
    shape: &ShapeParams,
    config: &MotionConfig,
    seed: SeedStream,
) -> Vec<PoseParams> {
    let mut rng = seed.rng();
    let n = template.joint_count();
    let lift = root_pelvis_height(template, shape);
    let base = random_pose(template, config.base_amplitude, config, &mut rng);
    let swing: Vec<[f64; 3]> =
        (0..n).map(|_| [0, 1, 2].map(|_| rng.random_range(-config.swing_amplitude..=config.swing_amplitude))).collect();
    let phase: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let freq = rng.random_range(config.frequency.0..=config.frequency.1);
    let speed = rng.random_range(config.speed.0..=config.speed.1);
    let yaw = base.axis_angles[0][2];
    let heading = Vector3::new(yaw.sin(), -yaw.cos(), 0.0);

    (0..config.frames)
        .map(|f| {
            let t = f as f64 / config.fps;
            let mut pose = base.clone();
            for j in 0..n {
                let s = (2.0 * PI * freq * t + phase[j]).sin();
                let scale = if j == 0 { 0.3 } else { 1.0 };
                for c in 0..3 {
                    pose.axis_angles[j][c] += scale * swing[j][c] * s;
                }
                let w = crate::body_model::rotation::wrap_principal(&Vector3::from(pose.axis_angles[j]));
                pose.axis_angles[j] = [w.x, w.y, w.z];
            }
            let p = Vector3::from(base.root_translation) + heading * (speed * t);
            pose.root_translation = [p.x, p.y, lift];
            pose
        })
        .collect()
}

/// Joint observations of posed subjects, optionally with i.i.d. Gaussian noise.
pub fn observe(
    template: &AvatarTemplate,
    shape: &ShapeParams,
    poses: &[PoseParams],
    noise_sigma: f64,
    fps: f64,
    seed: SeedStream,
) -> Result<Vec<SkeletonFrame>, BodyModelError> {
    let mut rng = seed.rng();
    let noise = Normal::new(0.0, noise_sigma.max(0.0)).expect("finite sigma");
    poses
        .iter()
        .enumerate()
        .map(|(f, pose)| {
            let z = joint_positions(template, shape, pose)?;
            let joints = z
                .iter()
                .map(|p| {
                    if noise_sigma > 0.0 {
                        [p.x + noise.sample(&mut rng), p.y + noise.sample(&mut rng), p.z + noise.sample(&mut rng)]
                    } else {
                        [p.x, p.y, p.z]
                    }
                })
                .collect();
            Ok(SkeletonFrame::new(joints, f as f64 / fps))
        })
        .collect()
}
