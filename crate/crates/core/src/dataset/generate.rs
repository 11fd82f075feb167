use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bundle::{encode_bundle, write_bundle_atomic};
use super::meta::{AvatarMeta, FrameMeta, SeedInfo, META_FORMAT_VERSION};
use super::scenario::ScenarioConfig;
use super::sequence::{load_skeleton_sequences, LoadedSequence};
use super::DatasetError;
use crate::body_model::{build_canonical_avatar, AvatarTemplate, PoseParams, ShapeParams};
use crate::compose::{composite, ratio_image, BackgroundPlate};
use crate::raster::{render_with, RenderOptions};
use crate::retarget::{fit_shape, sample_frames, SequenceFitter, SequenceInit};
use crate::scanning::{virtual_scan, LabelTexture, NoisyLabeler};
use crate::scene::{make_dome_cameras, perturb_distal_joints, AvatarInstance, Camera, Environment, SceneGraph};
use crate::seed::SeedStream;

/// Runs abort once more than this fraction of bundles failed.
pub const MAX_FAILURE_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub frame: usize,
    /// `None` when the whole frame failed before rendering.
    pub camera: Option<String>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectSummary {
    pub subject_id: String,
    pub instance_id: u8,
    pub shape: ShapeParams,
    pub frames_fitted: usize,
    pub frames_failed: usize,
    /// Per-frame joint discrepancy (m²).
    pub mean_residual: f64,
    pub max_residual: f64,
    pub mean_iterations: f64,
    /// Texels labeled by scanning; `None` with ground-truth labels.
    pub labeled_texels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub fit_seconds: f64,
    pub label_seconds: f64,
    pub render_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub seed: u64,
    pub scenario: ScenarioConfig,
    pub frames: usize,
    pub cameras: usize,
    pub bundles: usize,
    pub bundle_dirs: Vec<String>,
    pub failures: Vec<Failure>,
    pub subjects: Vec<SubjectSummary>,
    pub timings: Option<Timings>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

struct Subject {
    id: String,
    instance_id: u8,
    shape: ShapeParams,
    /// Per sequence frame; `Err` holds the failure message.
    poses: Vec<Result<PoseParams, String>>,
    labels: Arc<LabelTexture>,
    summary: SubjectSummary,
}

fn select_sequence(
    mut loaded: Vec<LoadedSequence>,
    wanted: Option<&str>,
    origin: &Path,
) -> Result<LoadedSequence, DatasetError> {
    match wanted {
        None => Ok(loaded.swap_remove(0)),
        Some(id) => loaded
            .into_iter()
            .find(|s| s.file.subject_id == id)
            .ok_or_else(|| DatasetError::Validation(vec![format!("{}: no subject {id:?}", origin.display())])),
    }
}

fn fit_subject(
    template: &AvatarTemplate,
    sequence: &LoadedSequence,
    instance_id: u8,
    scenario: &ScenarioConfig,
    seed: SeedStream,
) -> Result<(ShapeParams, Vec<Result<PoseParams, String>>, SubjectSummary), DatasetError> {
    let subject_id = sequence.file.subject_id.clone();
    let fit_err = |source| DatasetError::Fit { subject: subject_id.clone(), source };
    let picks = sample_frames(&sequence.frames, scenario.optim.k_samples, seed.named("samples"));
    let samples: Vec<_> = picks.iter().map(|&i| sequence.frames[i].clone()).collect();
    let shape = fit_shape(template, &samples, &scenario.optim).map_err(fit_err)?.shape;
    let mut fitter = SequenceFitter::new(template, shape.clone(), scenario.optim.clone(), SequenceInit::WarmStart);
    let mut poses = Vec::with_capacity(sequence.frames.len());
    let (mut residuals, mut iterations) = (Vec::new(), Vec::new());
    for frame in &sequence.frames {
        match fitter.step(frame) {
            Ok(fit) => {
                residuals.push(fit.discrepancy);
                iterations.push(fit.iterations as f64);
                poses.push(Ok(fit.pose));
            }
            Err(e) => poses.push(Err(format!("subject {subject_id}: {e}"))),
        }
    }
    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    let summary = SubjectSummary {
        subject_id: subject_id.clone(),
        instance_id,
        shape: shape.clone(),
        frames_fitted: residuals.len(),
        frames_failed: poses.len() - residuals.len(),
        mean_residual: mean(&residuals),
        max_residual: residuals.iter().copied().fold(0.0, f64::max),
        mean_iterations: mean(&iterations),
        labeled_texels: None,
    };
    Ok((shape, poses, summary))
}

/// Fits every subject, renders every (frame, camera) pair and writes one
/// bundle per pair below `out/frames`, plus `out/manifest.json`.
pub fn generate_dataset(scenario: &ScenarioConfig, base_dir: &Path, out: &Path) -> Result<Manifest, DatasetError> {
    let started = Instant::now();
    scenario.validate(base_dir)?;
    let root = SeedStream::new(scenario.seed);
    let template = Arc::new(build_canonical_avatar(&scenario.avatar).map_err(DatasetError::Body)?);

    // every input is read before any work starts
    let mut sequences = Vec::with_capacity(scenario.subjects.len());
    for s in &scenario.subjects {
        let path = base_dir.join(&s.sequence);
        let loaded = load_skeleton_sequences(&path, &template)?;
        sequences.push(select_sequence(loaded, s.subject_id.as_deref(), &path)?);
    }
    let cameras = make_dome_cameras(&scenario.cameras).map_err(DatasetError::Scene)?;
    let mut plates = Vec::with_capacity(cameras.len());
    for (k, cam) in cameras.iter().enumerate() {
        let plate = match scenario.backgrounds.get(&cam.id) {
            Some(p) => BackgroundPlate::load(cam.id.clone(), &base_dir.join(p))?,
            None => {
                BackgroundPlate::procedural(cam.id.clone(), cam.width, cam.height, root.named("plate").child(k as u64))
            }
        };
        if plate.width != cam.width || plate.height != cam.height {
            return Err(DatasetError::Validation(vec![format!(
                "backgrounds.{}: plate is {}x{}, camera is {}x{}",
                cam.id, plate.width, plate.height, cam.width, cam.height
            )]));
        }
        plates.push(plate);
    }
    let environment =
        scenario.environment.as_ref().map(Environment::octagon).transpose().map_err(DatasetError::Scene)?;

    let fit_started = Instant::now();
    let fits = sequences
        .par_iter()
        .enumerate()
        .map(|(i, seq)| fit_subject(&template, seq, i as u8 + 1, scenario, root.named("fit").child(i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let fit_seconds = fit_started.elapsed().as_secs_f64();

    let label_started = Instant::now();
    let ground_truth = Arc::new(LabelTexture::ground_truth(&template));
    let mut subjects = Vec::with_capacity(fits.len());
    for (i, (shape, poses, mut summary)) in fits.into_iter().enumerate() {
        let labels = match scenario.scan_config() {
            None => Arc::clone(&ground_truth),
            Some((config, noise)) => {
                let labeler = NoisyLabeler { rho: noise };
                let seed = root.named("scan").child(i as u64);
                let scan = virtual_scan(&template, &shape, &ground_truth, &labeler, &config, seed)?;
                summary.labeled_texels = Some(scan.texture.labeled_count());
                Arc::new(scan.texture)
            }
        };
        subjects.push(Subject {
            id: summary.subject_id.clone(),
            instance_id: i as u8 + 1,
            shape,
            poses,
            labels,
            summary,
        });
    }
    let label_seconds = label_started.elapsed().as_secs_f64();

    let available = sequences.iter().map(|s| s.frames.len()).min().unwrap_or(0);
    let mut frame_indices: Vec<usize> = (0..available).step_by(scenario.frame_stride).collect();
    if let Some(cap) = scenario.max_frames {
        frame_indices.truncate(cap);
    }

    let render_started = Instant::now();
    let options = RenderOptions {
        light: scenario.light,
        shadows: scenario.shadows,
        quantizer: scenario.depth_quantizer,
        ..RenderOptions::default()
    };
    let frames_dir = out.join("frames");
    std::fs::create_dir_all(&frames_dir)
        .map_err(|source| DatasetError::Io { path: frames_dir.display().to_string(), source })?;

    let scenes: Vec<Result<SceneGraph, String>> = frame_indices
        .par_iter()
        .map(|&f| {
            let seed = root.named("frame").child(f as u64);
            let avatars = subjects
                .iter()
                .map(|s| {
                    let pose = s.poses[f].clone()?;
                    let pose = perturb_distal_joints(
                        &pose,
                        &template.distal_joints,
                        scenario.distal_noise,
                        seed.child(s.instance_id as u64),
                    );
                    Ok(AvatarInstance {
                        instance_id: s.instance_id,
                        template: Arc::clone(&template),
                        shape: s.shape.clone(),
                        pose,
                        labels: Arc::clone(&s.labels),
                    })
                })
                .collect::<Result<Vec<_>, String>>()?;
            SceneGraph::new(environment.clone(), avatars).map_err(|e| e.to_string())
        })
        .collect();

    let jobs: Vec<(usize, usize)> =
        (0..frame_indices.len()).flat_map(|fi| (0..cameras.len()).map(move |c| (fi, c))).collect();
    let outcomes: Vec<Result<String, Failure>> = jobs
        .par_iter()
        .map(|&(fi, ci)| {
            let f = frame_indices[fi];
            let camera = &cameras[ci];
            let fail = |error: String| Failure { frame: f, camera: Some(camera.id.clone()), error };
            let scene = scenes[fi].as_ref().map_err(|e| Failure {
                frame: f,
                camera: Some(camera.id.clone()),
                error: e.clone(),
            })?;
            let name = format!("{f:05}_{}", camera.id);
            let meta_for = |fb: &crate::raster::FrameBuffer, files: Vec<String>| {
                frame_meta(
                    scenario,
                    &template,
                    &subjects,
                    scene,
                    camera,
                    fb,
                    f,
                    sequences[0].frames[f].timestamp,
                    root,
                    files,
                )
            };
            let fb = render_with(scene, camera, &options);
            let background = render_with(&scene.environment_only(), camera, &options);
            let composite_rgb = if scenario.composite {
                let ratios = ratio_image(&fb, &background.rgb).map_err(|e| fail(e.to_string()))?;
                Some(composite(&plates[ci], &fb, &ratios).map_err(|e| fail(e.to_string()))?)
            } else {
                None
            };
            // the file list goes into the meta, so encode twice
            let draft = encode_bundle(&fb, &background.rgb, composite_rgb.as_deref(), &meta_for(&fb, Vec::new()));
            let names = draft.iter().map(|(n, _)| n.to_string()).collect();
            let files = encode_bundle(&fb, &background.rgb, composite_rgb.as_deref(), &meta_for(&fb, names));
            write_bundle_atomic(&frames_dir.join(&name), &files).map_err(|e| fail(e.to_string()))?;
            Ok(format!("frames/{name}"))
        })
        .collect();
    let render_seconds = render_started.elapsed().as_secs_f64();

    let mut bundle_dirs = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(d) => bundle_dirs.push(d),
            Err(f) => failures.push(f),
        }
    }
    let total = jobs.len();
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: scenario.seed,
        scenario: scenario.clone(),
        frames: frame_indices.len(),
        cameras: cameras.len(),
        bundles: bundle_dirs.len(),
        bundle_dirs,
        failures,
        subjects: subjects.into_iter().map(|s| s.summary).collect(),
        timings: scenario.record_timings.then(|| Timings {
            fit_seconds,
            label_seconds,
            render_seconds,
            total_seconds: started.elapsed().as_secs_f64(),
        }),
    };
    let path = out.join("manifest.json");
    std::fs::write(&path, manifest.to_json())
        .map_err(|source| DatasetError::Io { path: path.display().to_string(), source })?;
    if manifest.failures.len() as f64 > MAX_FAILURE_FRACTION * total as f64 {
        return Err(DatasetError::TooManyFailures { failed: manifest.failures.len(), total });
    }
    Ok(manifest)
}

#[allow(clippy::too_many_arguments)]
fn frame_meta(
    scenario: &ScenarioConfig,
    template: &AvatarTemplate,
    subjects: &[Subject],
    scene: &SceneGraph,
    camera: &Camera,
    fb: &crate::raster::FrameBuffer,
    frame: usize,
    timestamp: f64,
    root: SeedStream,
    files: Vec<String>,
) -> FrameMeta {
    FrameMeta {
        format_version: META_FORMAT_VERSION,
        frame_index: frame,
        timestamp,
        width: fb.width,
        height: fb.height,
        camera: camera.clone(),
        depth_quantizer: scenario.depth_quantizer,
        avatars: scene
            .avatars()
            .iter()
            .zip(&fb.avatars)
            .zip(subjects)
            .map(|((a, joints), s)| AvatarMeta {
                instance_id: a.instance_id,
                subject_id: s.id.clone(),
                shape: a.shape.clone(),
                pose: a.pose.clone(),
                joint_names: template.joint_names.clone(),
                joints: joints.joints.clone(),
            })
            .collect(),
        seeds: SeedInfo { root: scenario.seed, frame: root.named("frame").child(frame as u64).value() },
        files,
    }
}
