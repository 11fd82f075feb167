use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use synthcrowd::body_model::{build_canonical_avatar, AvatarBuildConfig, AvatarTemplate, ShapeParams};
use synthcrowd::compose::{composite, ratio_image, BackgroundPlate};
use synthcrowd::dataset::{
    generate_dataset, list_bundles, load_skeleton_sequences, read_bundle, Bundle, LoadedSequence, ScenarioConfig,
    SkeletonSequenceFile, DEPTH16_FILE, INSTANCE_FILE, U_FILE, V_FILE,
};
use synthcrowd::eval::{
    evaluate_frame_against, extract_joints_2d, EvalConfig, EvalReport, GroundTruthSkeleton, JointTextureMap,
    Prediction, Skeleton2d,
};
use synthcrowd::motion::{observe, random_shape, swing_sequence, MotionConfig};
use synthcrowd::pnm;
use synthcrowd::raster::FrameBuffer;
use synthcrowd::retarget::{fit_sequence, fit_shape, sample_frames, OptimConfig};
use synthcrowd::scanning::{virtual_scan, LabelTexture, NoisyLabeler, ScanConfig};
use synthcrowd::seed::SeedStream;

use crate::error::CliError;
use crate::{ComposeArgs, EvalArgs, FitArgs, GenerateArgs, Reference, ScanArgs, SynthArgs};

/// Written next to every output; holds what is needed to rerun the command.
#[derive(Debug, Serialize)]
struct RunManifest {
    command: &'static str,
    version: &'static str,
    seed: Option<u64>,
    config: Value,
    /// Relative to the manifest's directory.
    artifacts: Vec<String>,
    timings: Option<Value>,
}

impl RunManifest {
    fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("run manifest serializes");
        write_file(path, text.as_bytes())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// `out.json` → `out.json.run.json`.
fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".run.json");
    out.with_file_name(name)
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn timings(enabled: bool, started: Instant) -> Option<Value> {
    enabled.then(|| json!({ "total_seconds": started.elapsed().as_secs_f64() }))
}

fn template() -> Result<AvatarTemplate, CliError> {
    build_canonical_avatar(&AvatarBuildConfig::default()).map_err(|e| CliError::validation(e.to_string()))
}

fn select(loaded: Vec<LoadedSequence>, subject: Option<&str>, path: &Path) -> Result<LoadedSequence, CliError> {
    match subject {
        None => Ok(loaded.into_iter().next().expect("loader returns at least one sequence")),
        Some(id) => loaded
            .into_iter()
            .find(|s| s.file.subject_id == id)
            .ok_or_else(|| CliError::validation(format!("{}: no subject {id:?}", path.display()))),
    }
}

pub fn fit(args: &FitArgs, record_timings: bool) -> Result<(), CliError> {
    let started = Instant::now();
    let template = template()?;
    let sequence =
        select(load_skeleton_sequences(&args.skeletons, &template)?, args.subject.as_deref(), &args.skeletons)?;
    let config =
        OptimConfig { alpha: args.alpha, gamma: args.gamma, k_samples: args.k_samples, ..OptimConfig::default() };
    config.validate()?;
    let picks = sample_frames(&sequence.frames, config.k_samples, SeedStream::new(args.seed).named("samples"));
    let samples: Vec<_> = picks.iter().map(|&i| sequence.frames[i].clone()).collect();
    let shape = fit_shape(&template, &samples, &config)?.shape;
    let result = fit_sequence(&template, &shape, &sequence.frames, &config)?;
    write_file(&args.out, result.to_json().as_bytes())?;
    let rmse = result.residuals.iter().map(|r| (r / template.joint_count() as f64).sqrt()).fold(0.0, f64::max);
    RunManifest {
        command: "fit",
        version: env!("CARGO_PKG_VERSION"),
        seed: Some(args.seed),
        config: json!({
            "skeletons": args.skeletons,
            "subject_id": sequence.file.subject_id,
            "optim": config,
            "sampled_frames": picks,
        }),
        artifacts: vec![file_name(&args.out)],
        timings: timings(record_timings, started),
    }
    .write(&sidecar(&args.out))?;
    println!(
        "fitted {} frames of {}; shape {:?}; worst per-joint rmse {:.4} m",
        result.poses.len(),
        sequence.file.subject_id,
        result.shape.beta,
        rmse
    );
    Ok(())
}

/// A FitResult or a bare shape.
fn load_shape(path: &Path) -> Result<ShapeParams, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    let shape = value.get("shape").cloned().unwrap_or(value);
    let shape: ShapeParams = serde_json::from_value(shape)
        .map_err(|e| CliError::validation(format!("{}: no shape: {e}", path.display())))?;
    shape.validate().map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    Ok(shape)
}

pub fn scan(args: &ScanArgs, record_timings: bool) -> Result<(), CliError> {
    let started = Instant::now();
    if !(0.0..=1.0).contains(&args.noise) {
        return Err(CliError::validation(format!("--noise {} outside [0, 1]", args.noise)));
    }
    let template = Arc::new(template()?);
    let shape = load_shape(&args.avatar)?;
    if shape.len() != template.shape_count() {
        return Err(CliError::validation(format!(
            "{}: {} shape coefficients, expected {}",
            args.avatar.display(),
            shape.len(),
            template.shape_count()
        )));
    }
    let truth = Arc::new(LabelTexture::ground_truth(&template));
    let config = ScanConfig { views: args.views, ..ScanConfig::default() };
    let labeler = NoisyLabeler { rho: args.noise };
    let out = virtual_scan(&template, &shape, &truth, &labeler, &config, SeedStream::new(args.seed).named("scan"))?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    out.texture.save(&args.out)?;
    RunManifest {
        command: "scan",
        version: env!("CARGO_PKG_VERSION"),
        seed: Some(args.seed),
        config: json!({ "avatar": args.avatar, "shape": shape, "noise": args.noise, "scan": config }),
        artifacts: vec![file_name(&args.out), file_name(&synthcrowd::scanning::sidecar_path(&args.out))],
        timings: timings(record_timings, started),
    }
    .write(&sidecar(&args.out))?;
    println!("labeled {} texels from {} views", out.texture.labeled_count(), args.views);
    Ok(())
}

pub fn generate(args: &GenerateArgs, record_timings: bool) -> Result<(), CliError> {
    let started = Instant::now();
    let mut scenario = ScenarioConfig::load(&args.scenario)?;
    if let Some(n) = args.cameras {
        scenario.cameras.count = n;
    }
    if args.composite {
        scenario.composite = true;
    }
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    if let Some(n) = args.frames {
        scenario.max_frames = Some(n);
    }
    let base = args.scenario.parent().unwrap_or(Path::new("."));
    let manifest = generate_dataset(&scenario, base, &args.out)?;
    RunManifest {
        command: "generate",
        version: env!("CARGO_PKG_VERSION"),
        seed: Some(scenario.seed),
        config: json!({ "scenario": args.scenario, "resolved": scenario }),
        artifacts: std::iter::once("manifest.json".to_string()).chain(manifest.bundle_dirs.iter().cloned()).collect(),
        timings: timings(record_timings, started),
    }
    .write(&args.out.join("run.json"))?;
    println!(
        "{} bundles ({} frames x {} cameras, {} failed) in {}",
        manifest.bundles,
        manifest.frames,
        manifest.cameras,
        manifest.failures.len(),
        args.out.display()
    );
    Ok(())
}

fn frame_from_bundle(b: &Bundle) -> FrameBuffer {
    let mut fb = FrameBuffer::empty(b.meta.width, b.meta.height);
    fb.rgb = b.rgb.clone();
    fb.instance = b.instance.clone();
    fb.semantic = b.semantic.clone();
    fb.u_q = b.u_q.clone();
    fb.v_q = b.v_q.clone();
    fb.depth_q = b.depth_q.clone();
    fb.depth_m = b.depth_m();
    fb
}

pub fn compose(args: &ComposeArgs, record_timings: bool) -> Result<(), CliError> {
    let started = Instant::now();
    let bundle = read_bundle(&args.bundle)?;
    let frame = frame_from_bundle(&bundle);
    let camera_id = bundle.meta.camera.id.clone();
    let plate = match &args.plate {
        Some(p) => BackgroundPlate::load(camera_id, p)?,
        None => {
            BackgroundPlate::procedural(camera_id, frame.width, frame.height, SeedStream::new(args.seed).named("plate"))
        }
    };
    let ratios = ratio_image(&frame, &bundle.background)?;
    let rgb = composite(&plate, &frame, &ratios)?;
    write_file(&args.out, &pnm::encode_ppm(frame.width, frame.height, &rgb))?;
    RunManifest {
        command: "compose",
        version: env!("CARGO_PKG_VERSION"),
        seed: args.plate.is_none().then_some(args.seed),
        config: json!({ "bundle": args.bundle, "plate": args.plate }),
        artifacts: vec![file_name(&args.out)],
        timings: timings(record_timings, started),
    }
    .write(&sidecar(&args.out))?;
    println!(
        "composited {} onto {}",
        args.bundle.display(),
        args.plate.as_ref().map_or("a procedural plate".into(), |p| p.display().to_string())
    );
    Ok(())
}

struct PredictedChannels {
    u_q: Vec<u8>,
    v_q: Vec<u8>,
    instance: Vec<u8>,
    depth_m: Vec<f64>,
}

fn read_prediction(dir: &Path, width: u32, height: u32) -> Result<PredictedChannels, CliError> {
    let read = |name: &str, channels: u8, maxval: u16| -> Result<Vec<u16>, CliError> {
        let path = dir.join(name);
        let img = pnm::read(&path)?;
        if img.width != width || img.height != height || img.channels != channels || img.maxval != maxval {
            return Err(CliError::validation(format!(
                "{}: expected a {width}x{height} image with maxval {maxval}",
                path.display()
            )));
        }
        Ok(img.samples)
    };
    let bytes = |v: Vec<u16>| v.into_iter().map(|x| x as u8).collect::<Vec<u8>>();
    Ok(PredictedChannels {
        u_q: bytes(read(U_FILE, 1, 255)?),
        v_q: bytes(read(V_FILE, 1, 255)?),
        instance: bytes(read(INSTANCE_FILE, 1, 255)?),
        depth_m: read(DEPTH16_FILE, 1, 65535)?.into_iter().map(|d| d as f64 / 1000.0).collect(),
    })
}

pub fn eval(args: &EvalArgs, record_timings: bool) -> Result<(), CliError> {
    let started = Instant::now();
    if args.thresholds.is_empty() || args.thresholds.iter().any(|t| !(*t >= 0.0)) {
        return Err(CliError::validation("--thresholds must be non-negative numbers"));
    }
    let gt_dirs = if args.gt_dir.is_dir() { list_bundles(&args.gt_dir)? } else { Vec::new() };
    if gt_dirs.is_empty() {
        return Err(CliError::validation(format!("no frames found in {}", args.gt_dir.display())));
    }
    let pred_root =
        if args.pred_dir.join("frames").is_dir() { args.pred_dir.join("frames") } else { args.pred_dir.clone() };
    let template = template()?;
    let config = EvalConfig {
        thresholds: args.thresholds.clone(),
        match_threshold: args.match_threshold,
        ..EvalConfig::default()
    };
    let map = JointTextureMap::from_template(&template, config.disc_radius)?;
    let mut frames = Vec::with_capacity(gt_dirs.len());
    for dir in &gt_dirs {
        let gt = read_bundle(dir)?;
        let name = dir.file_name().expect("bundle dirs are named");
        let pred_dir = pred_root.join(name);
        if !pred_dir.is_dir() {
            return Err(CliError::validation(format!(
                "no prediction for {} in {}",
                name.to_string_lossy(),
                pred_root.display()
            )));
        }
        let pred = read_prediction(&pred_dir, gt.meta.width, gt.meta.height)?;
        let ground_truth: Vec<GroundTruthSkeleton> = gt
            .meta
            .avatars
            .iter()
            .map(|a| GroundTruthSkeleton {
                id: a.instance_id,
                joints: a.joints.iter().map(|j| j.position).collect(),
                visible: a.joints.iter().map(|j| j.visible).collect(),
            })
            .collect();
        let gt2d = match args.reference {
            Reference::Joints => ground_truth.iter().map(|g| g.project(&gt.meta.camera)).collect(),
            Reference::Extracted => extracted_reference(&gt, &ground_truth, &map)?,
        };
        let prediction = Prediction {
            width: gt.meta.width,
            height: gt.meta.height,
            u_q: &pred.u_q,
            v_q: &pred.v_q,
            instance: &pred.instance,
            depth_m: &pred.depth_m,
        };
        frames.push(evaluate_frame_against(&prediction, &gt2d, &ground_truth, &gt.meta.camera, &map, &config)?);
    }
    let report = EvalReport::from_frames(&frames, &config);
    match &args.out {
        Some(out) => {
            write_file(&out.join("report.json"), report.to_json().as_bytes())?;
            write_file(&out.join("report.csv"), report.to_csv().as_bytes())?;
            RunManifest {
                command: "eval",
                version: env!("CARGO_PKG_VERSION"),
                seed: None,
                config: json!({ "pred_dir": args.pred_dir, "gt_dir": args.gt_dir, "reference": args.reference, "eval": config }),
                artifacts: vec!["report.json".into(), "report.csv".into()],
                timings: timings(record_timings, started),
            }
            .write(&out.join("run.json"))?;
        }
        None => println!("{}", report.to_json()),
    }
    eprintln!("evaluated {} frames, detection rate {:.3}", report.frames, report.detection_rate);
    Ok(())
}

pub fn synth(args: &SynthArgs, record_timings: bool) -> Result<(), CliError> {
    let started = Instant::now();
    if args.frames == 0
        || !(args.fps > 0.0)
        || !(args.noise >= 0.0)
        || !(args.shape_bound >= 0.0)
        || !(args.spread >= 0.0)
    {
        return Err(CliError::validation(
            "--frames, --fps must be positive; --noise, --shape-bound, --spread non-negative",
        ));
    }
    let template = template()?;
    let seed = SeedStream::new(args.seed);
    let shape = random_shape(template.shape_count(), args.shape_bound, &mut seed.named("shape").rng());
    let motion =
        MotionConfig { frames: args.frames, fps: args.fps, position_range: args.spread, ..MotionConfig::default() };
    let poses = swing_sequence(&template, &shape, &motion, seed.named("motion"));
    let frames = observe(&template, &shape, &poses, args.noise, args.fps, seed.named("noise"))
        .map_err(|e| CliError::validation(e.to_string()))?;
    let file = SkeletonSequenceFile::from_frames(&args.subject_id, &template, &frames);
    write_file(&args.out, file.to_json().as_bytes())?;
    RunManifest {
        command: "synth",
        version: env!("CARGO_PKG_VERSION"),
        seed: Some(args.seed),
        config: json!({ "subject_id": args.subject_id, "shape": shape, "motion": motion, "noise": args.noise }),
        artifacts: vec![file_name(&args.out)],
        timings: timings(record_timings, started),
    }
    .write(&sidecar(&args.out))?;
    println!("wrote {} frames of {} to {}", args.frames, args.subject_id, args.out.display());
    Ok(())
}

fn extracted_reference(
    gt: &Bundle,
    ground_truth: &[GroundTruthSkeleton],
    map: &JointTextureMap,
) -> Result<Vec<Skeleton2d>, CliError> {
    let extracted = extract_joints_2d(gt.meta.width, gt.meta.height, &gt.u_q, &gt.v_q, &gt.instance, map)?;
    Ok(ground_truth
        .iter()
        .map(|g| {
            extracted
                .iter()
                .find(|s| s.id == g.id)
                .cloned()
                .unwrap_or(Skeleton2d { id: g.id, joints: vec![None; g.joints.len()] })
        })
        .collect())
}
