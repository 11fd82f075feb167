use nalgebra::{DMatrix, DVector, Vector3};
use rand::seq::index::sample;

use super::lm::{minimize, Diverged, LeastSquares, LmSettings};
use super::{FitError, FitResult, OptimConfig, SkeletonFrame, MIN_CONFIDENT_JOINTS};
use crate::body_model::rotation::wrap_principal;
use crate::body_model::{joint_jacobian, joint_positions, AvatarTemplate, PoseParams, ShapeParams, SHAPE_BOUND};
use crate::seed::SeedStream;

/// `Σ_i c_i ‖z_i − x_i‖²` over joints with non-zero confidence.
pub fn joint_discrepancy(
    template: &AvatarTemplate,
    shape: &ShapeParams,
    pose: &PoseParams,
    observed: &SkeletonFrame,
) -> Result<f64, FitError> {
    observed.validate(template.joint_count())?;
    let z = joint_positions(template, shape, pose)?;
    Ok(weighted_discrepancy(&z, observed))
}

fn weighted_discrepancy(z: &[Vector3<f64>], observed: &SkeletonFrame) -> f64 {
    let mut sum = 0.0;
    for (i, zi) in z.iter().enumerate() {
        let c = observed.confidence[i];
        if c > 0.0 {
            sum += c * (zi - Vector3::from(observed.joints[i])).norm_squared();
        }
    }
    sum
}

fn settings(config: &OptimConfig) -> LmSettings {
    LmSettings {
        max_iterations: config.max_iterations,
        gradient_tolerance: config.gradient_tolerance,
        damping_initial: config.damping.initial,
        damping_up: config.damping.up,
        damping_down: config.damping.down,
    }
}

fn pose_to_vec(pose: &PoseParams) -> DVector<f64> {
    let mut x: Vec<f64> = pose.axis_angles.iter().flatten().copied().collect();
    x.extend_from_slice(&pose.root_translation);
    DVector::from_vec(x)
}

fn vec_to_pose(x: &DVector<f64>) -> PoseParams {
    let n = (x.len() - 3) / 3;
    PoseParams {
        axis_angles: (0..n).map(|j| [x[3 * j], x[3 * j + 1], x[3 * j + 2]]).collect(),
        root_translation: [x[3 * n], x[3 * n + 1], x[3 * n + 2]],
    }
}

/// Confident joints and the square roots of their weights.
fn confident_rows(observed: &SkeletonFrame) -> Vec<(usize, f64)> {
    observed.confidence.iter().enumerate().filter(|(_, &c)| c > 0.0).map(|(i, &c)| (i, c.sqrt())).collect()
}

struct PoseProblem<'a> {
    template: &'a AvatarTemplate,
    shape: &'a ShapeParams,
    observed: &'a SkeletonFrame,
    rows: Vec<(usize, f64)>,
    reg: f64,
}

impl PoseProblem<'_> {
    fn data_residuals(&self, z: &[Vector3<f64>], r: &mut DVector<f64>) {
        for (k, &(i, w)) in self.rows.iter().enumerate() {
            let d = (z[i] - Vector3::from(self.observed.joints[i])) * w;
            r.fixed_view_mut::<3, 1>(3 * k, 0).copy_from(&d);
        }
    }

    fn regularizer_residuals(&self, x: &DVector<f64>, r: &mut DVector<f64>) {
        let base = 3 * self.rows.len();
        let rot = x.len() - 3;
        for p in 0..rot {
            r[base + p] = self.reg * x[p];
        }
    }

    fn residual_len(&self, x: &DVector<f64>) -> usize {
        3 * self.rows.len() + x.len() - 3
    }
}

impl LeastSquares for PoseProblem<'_> {
    fn evaluate(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let pose = vec_to_pose(x);
        let m = self.template.shape_count();
        let jj = joint_jacobian(self.template, self.shape, &pose).expect("validated dimensions");
        let mut r = DVector::zeros(self.residual_len(x));
        self.data_residuals(&jj.joints, &mut r);
        self.regularizer_residuals(x, &mut r);
        let mut jac = DMatrix::zeros(r.len(), x.len());
        for (k, &(i, w)) in self.rows.iter().enumerate() {
            let block = jj.matrix.view((3 * i, m), (3, x.len())) * w;
            jac.view_mut((3 * k, 0), (3, x.len())).copy_from(&block);
        }
        let base = 3 * self.rows.len();
        for p in 0..x.len() - 3 {
            jac[(base + p, p)] = self.reg;
        }
        (r, jac)
    }

    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let pose = vec_to_pose(x);
        let mut r = DVector::zeros(self.residual_len(x));
        match joint_positions(self.template, self.shape, &pose) {
            Ok(z) => self.data_residuals(&z, &mut r),
            Err(_) => r.fill(f64::NAN),
        }
        self.regularizer_residuals(x, &mut r);
        r
    }

    fn project(&self, x: &mut DVector<f64>) {
        for j in 0..(x.len() - 3) / 3 {
            let w = wrap_principal(&Vector3::new(x[3 * j], x[3 * j + 1], x[3 * j + 2]));
            x.fixed_view_mut::<3, 1>(3 * j, 0).copy_from(&w);
        }
    }
}

/// Outcome of a single-frame pose fit.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseFit {
    pub pose: PoseParams,
    /// Joint discrepancy at the returned pose (m²).
    pub discrepancy: f64,
    /// Discrepancy plus `γ‖p‖²`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Norm of the objective gradient at the returned pose.
    pub gradient_norm: f64,
    /// Objective after every accepted step, starting at the initial pose.
    pub trace: Vec<f64>,
}

/// Minimises `Δ(β, p, x) + γ‖p‖²` over the pose from `init`.
pub fn fit_pose(
    template: &AvatarTemplate,
    shape: &ShapeParams,
    observed: &SkeletonFrame,
    init: &PoseParams,
    config: &OptimConfig,
) -> Result<PoseFit, FitError> {
    config.validate()?;
    observed.validate(template.joint_count())?;
    init.validate()?;
    if init.joint_count() != template.joint_count() {
        return Err(FitError::Dimension { expected: template.joint_count(), got: init.joint_count() });
    }
    let rows = confident_rows(observed);
    if rows.len() < MIN_CONFIDENT_JOINTS {
        return Err(FitError::Argument(format!(
            "{} confident joints, at least {MIN_CONFIDENT_JOINTS} required",
            rows.len()
        )));
    }
    // surface shape errors before entering the solver
    joint_positions(template, shape, init)?;
    let problem = PoseProblem { template, shape, observed, rows, reg: config.gamma.sqrt() };
    let outcome = minimize(&problem, pose_to_vec(init), &settings(config)).map_err(|Diverged { last_valid }| {
        FitError::Divergence { frame: None, last_pose: Some(Box::new(vec_to_pose(&last_valid))), last_shape: None }
    })?;
    let pose = vec_to_pose(&outcome.x);
    let z = joint_positions(template, shape, &pose)?;
    let discrepancy = weighted_discrepancy(&z, observed);
    Ok(PoseFit {
        pose,
        discrepancy,
        objective: outcome.objective,
        iterations: outcome.iterations,
        converged: outcome.converged,
        gradient_norm: outcome.gradient_norm,
        trace: outcome.trace,
    })
}

struct ShapeProblem<'a> {
    template: &'a AvatarTemplate,
    frames: &'a [SkeletonFrame],
    poses: &'a [PoseParams],
    rows: Vec<Vec<(usize, f64)>>,
    reg: f64,
}

impl ShapeProblem<'_> {
    fn len(&self) -> usize {
        self.rows.iter().map(|r| 3 * r.len()).sum::<usize>() + self.template.shape_count()
    }
}

impl LeastSquares for ShapeProblem<'_> {
    fn evaluate(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let m = self.template.shape_count();
        let shape = ShapeParams { beta: x.iter().copied().collect() };
        let mut r = DVector::zeros(self.len());
        let mut jac = DMatrix::zeros(self.len(), m);
        let mut row = 0;
        for ((frame, pose), rows) in self.frames.iter().zip(self.poses).zip(&self.rows) {
            let jj = joint_jacobian(self.template, &shape, pose).expect("validated dimensions");
            for &(i, w) in rows {
                let d = (jj.joints[i] - Vector3::from(frame.joints[i])) * w;
                r.fixed_view_mut::<3, 1>(row, 0).copy_from(&d);
                let block = jj.matrix.view((3 * i, 0), (3, m)) * w;
                jac.view_mut((row, 0), (3, m)).copy_from(&block);
                row += 3;
            }
        }
        for k in 0..m {
            r[row + k] = self.reg * x[k];
            jac[(row + k, k)] = self.reg;
        }
        (r, jac)
    }

    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let m = self.template.shape_count();
        let shape = ShapeParams { beta: x.iter().copied().collect() };
        let mut r = DVector::zeros(self.len());
        let mut row = 0;
        for ((frame, pose), rows) in self.frames.iter().zip(self.poses).zip(&self.rows) {
            let z = joint_positions(self.template, &shape, pose).expect("validated dimensions");
            for &(i, w) in rows {
                let d = (z[i] - Vector3::from(frame.joints[i])) * w;
                r.fixed_view_mut::<3, 1>(row, 0).copy_from(&d);
                row += 3;
            }
        }
        for k in 0..m {
            r[row + k] = self.reg * x[k];
        }
        r
    }

    fn project(&self, x: &mut DVector<f64>) {
        for b in x.iter_mut() {
            *b = b.clamp(-SHAPE_BOUND, SHAPE_BOUND);
        }
    }
}

/// All sampled poses and the shape as one parameter vector
/// `[β | p_1 | … | p_K]`.
struct JointProblem<'a> {
    template: &'a AvatarTemplate,
    frames: &'a [SkeletonFrame],
    rows: Vec<Vec<(usize, f64)>>,
    shape_reg: f64,
    pose_reg: f64,
}

impl JointProblem<'_> {
    fn pose_len(&self) -> usize {
        3 * self.template.joint_count() + 3
    }

    fn unpack(&self, x: &DVector<f64>) -> (ShapeParams, Vec<PoseParams>) {
        let m = self.template.shape_count();
        let q = self.pose_len();
        let shape = ShapeParams { beta: x.rows(0, m).iter().copied().collect() };
        let poses = (0..self.frames.len()).map(|k| vec_to_pose(&x.rows(m + k * q, q).into_owned())).collect();
        (shape, poses)
    }

    fn pack(shape: &ShapeParams, poses: &[PoseParams]) -> DVector<f64> {
        let mut x = shape.beta.clone();
        for p in poses {
            x.extend(pose_to_vec(p).iter());
        }
        DVector::from_vec(x)
    }

    fn len(&self) -> usize {
        let rot = 3 * self.template.joint_count();
        self.rows.iter().map(|r| 3 * r.len() + rot).sum::<usize>() + self.template.shape_count()
    }

    fn fill(&self, x: &DVector<f64>, mut jac: Option<&mut DMatrix<f64>>) -> DVector<f64> {
        let m = self.template.shape_count();
        let q = self.pose_len();
        let rot = q - 3;
        let (shape, poses) = self.unpack(x);
        let mut r = DVector::zeros(self.len());
        let mut row = 0;
        for (k, ((frame, pose), rows)) in self.frames.iter().zip(&poses).zip(&self.rows).enumerate() {
            let col = m + k * q;
            let z = match jac.as_deref_mut() {
                Some(jac) => {
                    let jj = joint_jacobian(self.template, &shape, pose).expect("validated dimensions");
                    for (n, &(i, w)) in rows.iter().enumerate() {
                        let shape_block = jj.matrix.view((3 * i, 0), (3, m)) * w;
                        jac.view_mut((row + 3 * n, 0), (3, m)).copy_from(&shape_block);
                        let pose_block = jj.matrix.view((3 * i, m), (3, q)) * w;
                        jac.view_mut((row + 3 * n, col), (3, q)).copy_from(&pose_block);
                    }
                    jj.joints
                }
                None => match joint_positions(self.template, &shape, pose) {
                    Ok(z) => z,
                    Err(_) => {
                        r.fill(f64::NAN);
                        return r;
                    }
                },
            };
            for &(i, w) in rows {
                let d = (z[i] - Vector3::from(frame.joints[i])) * w;
                r.fixed_view_mut::<3, 1>(row, 0).copy_from(&d);
                row += 3;
            }
            for p in 0..rot {
                r[row + p] = self.pose_reg * x[col + p];
                if let Some(jac) = jac.as_deref_mut() {
                    jac[(row + p, col + p)] = self.pose_reg;
                }
            }
            row += rot;
        }
        for k in 0..m {
            r[row + k] = self.shape_reg * x[k];
            if let Some(jac) = jac.as_deref_mut() {
                jac[(row + k, k)] = self.shape_reg;
            }
        }
        r
    }
}

impl LeastSquares for JointProblem<'_> {
    fn evaluate(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let mut jac = DMatrix::zeros(self.len(), x.len());
        let r = self.fill(x, Some(&mut jac));
        (r, jac)
    }

    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        self.fill(x, None)
    }

    /// Each frame's rows touch only the shape columns and its own pose
    /// columns, so the normal matrix is summed from small per-frame blocks.
    fn normal_equations(&self, r: &DVector<f64>, jac: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
        let m = self.template.shape_count();
        let q = self.pose_len();
        let rot = q - 3;
        let mut normal = DMatrix::zeros(jac.ncols(), jac.ncols());
        let mut row = 0;
        for (k, rows) in self.rows.iter().enumerate() {
            let col = m + k * q;
            let len = 3 * rows.len() + rot;
            let mut block = DMatrix::zeros(len, m + q);
            block.columns_mut(0, m).copy_from(&jac.view((row, 0), (len, m)));
            block.columns_mut(m, q).copy_from(&jac.view((row, col), (len, q)));
            let local = block.tr_mul(&block);
            let shape_shape = normal.view((0, 0), (m, m)) + local.view((0, 0), (m, m));
            normal.view_mut((0, 0), (m, m)).copy_from(&shape_shape);
            normal.view_mut((0, col), (m, q)).copy_from(&local.view((0, m), (m, q)));
            normal.view_mut((col, 0), (q, m)).copy_from(&local.view((m, 0), (q, m)));
            normal.view_mut((col, col), (q, q)).copy_from(&local.view((m, m), (q, q)));
            row += len;
        }
        for k in 0..m {
            normal[(k, k)] += self.shape_reg * self.shape_reg;
        }
        (normal, jac.tr_mul(r))
    }

    fn project(&self, x: &mut DVector<f64>) {
        let m = self.template.shape_count();
        for b in x.rows_mut(0, m).iter_mut() {
            *b = b.clamp(-SHAPE_BOUND, SHAPE_BOUND);
        }
        for k in 0..self.frames.len() {
            let col = m + k * self.pose_len();
            for j in 0..self.template.joint_count() {
                let c = col + 3 * j;
                let w = wrap_principal(&Vector3::new(x[c], x[c + 1], x[c + 2]));
                x.fixed_view_mut::<3, 1>(c, 0).copy_from(&w);
            }
        }
    }
}

/// Outcome of shape fitting over sampled frames.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeFit {
    pub shape: ShapeParams,
    pub poses: Vec<PoseParams>,
    /// Total objective after every alternation, starting at the initial guess.
    pub objective_trace: Vec<f64>,
    pub alternations: usize,
}

fn total_objective(
    template: &AvatarTemplate,
    shape: &ShapeParams,
    poses: &[PoseParams],
    frames: &[SkeletonFrame],
    config: &OptimConfig,
) -> Result<f64, FitError> {
    let mut total = config.alpha * shape.beta.iter().map(|b| b * b).sum::<f64>();
    for (pose, frame) in poses.iter().zip(frames) {
        let z = joint_positions(template, shape, pose)?;
        total += weighted_discrepancy(&z, frame) + config.gamma * pose.rotation_norm_squared();
    }
    Ok(total)
}

/// Recovers one shape shared by all `samples`, alternating per-frame pose fits
/// with a shape step under fixed poses.
pub fn fit_shape(
    template: &AvatarTemplate,
    samples: &[SkeletonFrame],
    config: &OptimConfig,
) -> Result<ShapeFit, FitError> {
    config.validate()?;
    if samples.is_empty() {
        return Err(FitError::Argument("shape fitting needs at least one frame".into()));
    }
    let n = template.joint_count();
    for (k, frame) in samples.iter().enumerate() {
        frame.validate(n)?;
        if 2 * frame.confident_count() < n {
            return Err(FitError::Argument(format!(
                "sample {k} has {} confident joints, at least half of {n} required",
                frame.confident_count()
            )));
        }
    }
    let m = template.shape_count();
    let mut shape = ShapeParams::zeros(m);
    let mut poses = vec![PoseParams::identity(n); samples.len()];
    let mut trace = vec![total_objective(template, &shape, &poses, samples, config)?];
    let rows: Vec<_> = samples.iter().map(confident_rows).collect();
    let mut alternations = 0;

    for _ in 0..config.max_alternations {
        alternations += 1;
        for (k, frame) in samples.iter().enumerate() {
            let fit = fit_pose(template, &shape, frame, &poses[k], config).map_err(|e| match e {
                FitError::Divergence { last_pose, .. } => {
                    FitError::Divergence { frame: Some(k), last_pose, last_shape: Some(shape.clone()) }
                }
                other => other,
            })?;
            poses[k] = fit.pose;
        }
        let problem =
            ShapeProblem { template, frames: samples, poses: &poses, rows: rows.clone(), reg: config.alpha.sqrt() };
        let x0 = DVector::from_vec(shape.beta.clone());
        let outcome = minimize(&problem, x0, &settings(config)).map_err(|d| FitError::Divergence {
            frame: None,
            last_pose: None,
            last_shape: Some(ShapeParams { beta: d.last_valid.iter().copied().collect() }),
        })?;
        shape = ShapeParams { beta: outcome.x.iter().copied().collect() };
        let objective = total_objective(template, &shape, &poses, samples, config)?;
        let previous = *trace.last().expect("non-empty trace");
        trace.push(objective);
        if previous - objective <= 1e-10 * previous + 1e-20 {
            break;
        }
    }
    // Block alternation crawls along directions where shape and pose trade
    // off; a coupled solve from its result removes the remainder.
    let problem =
        JointProblem { template, frames: samples, rows, shape_reg: config.alpha.sqrt(), pose_reg: config.gamma.sqrt() };
    let outcome = minimize(&problem, JointProblem::pack(&shape, &poses), &settings(config)).map_err(|d| {
        let (s, _) = problem.unpack(&d.last_valid);
        FitError::Divergence { frame: None, last_pose: None, last_shape: Some(s) }
    })?;
    (shape, poses) = problem.unpack(&outcome.x);
    trace.push(total_objective(template, &shape, &poses, samples, config)?);
    shape.validate()?;
    Ok(ShapeFit { shape, poses, objective_trace: trace, alternations })
}

/// Picks up to `k` distinct frames with at least half of their joints
/// confident, in increasing order.
pub fn sample_frames(frames: &[SkeletonFrame], k: usize, seed: SeedStream) -> Vec<usize> {
    let eligible: Vec<usize> = frames
        .iter()
        .enumerate()
        .filter(|(_, f)| 2 * f.confident_count() >= f.confidence.len())
        .map(|(i, _)| i)
        .collect();
    if eligible.len() <= k {
        return eligible;
    }
    let mut rng = seed.rng();
    let mut picked: Vec<usize> = sample(&mut rng, eligible.len(), k).into_iter().map(|i| eligible[i]).collect();
    picked.sort_unstable();
    picked
}

/// Initialisation schedule for sequence fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceInit {
    /// Frame t starts from the solution of frame t−1.
    WarmStart,
    /// Every frame starts from the rest pose.
    RestPose,
}

/// Per-frame result of [`SequenceFitter::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFit {
    pub pose: PoseParams,
    pub discrepancy: f64,
    pub iterations: usize,
    pub unfit: bool,
}

/// Incremental sequence fitting; the warm-start chain lives here.
pub struct SequenceFitter<'a> {
    template: &'a AvatarTemplate,
    shape: ShapeParams,
    config: OptimConfig,
    init: SequenceInit,
    previous: Option<PoseParams>,
}

impl<'a> SequenceFitter<'a> {
    pub fn new(template: &'a AvatarTemplate, shape: ShapeParams, config: OptimConfig, init: SequenceInit) -> Self {
        SequenceFitter { template, shape, config, init, previous: None }
    }

    pub fn previous_pose(&self) -> PoseParams {
        self.previous.clone().unwrap_or_else(|| PoseParams::identity(self.template.joint_count()))
    }

    pub fn step(&mut self, frame: &SkeletonFrame) -> Result<FrameFit, FitError> {
        frame.validate(self.template.joint_count())?;
        let start = match self.init {
            SequenceInit::WarmStart => self.previous_pose(),
            SequenceInit::RestPose => PoseParams::identity(self.template.joint_count()),
        };
        if frame.confident_count() < MIN_CONFIDENT_JOINTS {
            let pose = self.previous_pose();
            let z = joint_positions(self.template, &self.shape, &pose)?;
            let discrepancy = weighted_discrepancy(&z, frame);
            self.previous = Some(pose.clone());
            return Ok(FrameFit { pose, discrepancy, iterations: 0, unfit: true });
        }
        let fit = fit_pose(self.template, &self.shape, frame, &start, &self.config)?;
        self.previous = Some(fit.pose.clone());
        Ok(FrameFit { pose: fit.pose, discrepancy: fit.discrepancy, iterations: fit.iterations, unfit: false })
    }
}

/// Fits every frame of `sequence` with the shape fixed.
pub fn fit_sequence(
    template: &AvatarTemplate,
    shape: &ShapeParams,
    sequence: &[SkeletonFrame],
    config: &OptimConfig,
) -> Result<FitResult, FitError> {
    fit_sequence_with(template, shape, sequence, config, SequenceInit::WarmStart)
}

pub fn fit_sequence_with(
    template: &AvatarTemplate,
    shape: &ShapeParams,
    sequence: &[SkeletonFrame],
    config: &OptimConfig,
    init: SequenceInit,
) -> Result<FitResult, FitError> {
    config.validate()?;
    if sequence.is_empty() {
        return Err(FitError::Argument("empty sequence".into()));
    }
    let mut fitter = SequenceFitter::new(template, shape.clone(), config.clone(), init);
    let mut result = FitResult {
        shape: shape.clone(),
        poses: Vec::with_capacity(sequence.len()),
        residuals: Vec::with_capacity(sequence.len()),
        iterations: Vec::with_capacity(sequence.len()),
        unfit_frames: Vec::new(),
    };
    for (t, frame) in sequence.iter().enumerate() {
        let fit = fitter.step(frame).map_err(|e| match e {
            FitError::Divergence { last_pose, last_shape, .. } => {
                FitError::Divergence { frame: Some(t), last_pose, last_shape }
            }
            other => other,
        })?;
        if fit.unfit {
            result.unfit_frames.push(t);
        }
        result.poses.push(fit.pose);
        result.residuals.push(fit.discrepancy);
        result.iterations.push(fit.iterations);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body_model::{build_canonical_avatar, AvatarBuildConfig};
    use crate::motion::{observe, random_shape, swing_sequence, MotionConfig};

    #[test]
    fn blocked_normal_equations_match_the_dense_products() {
        let t = build_canonical_avatar(&AvatarBuildConfig::default()).unwrap();
        let s = SeedStream::new(3);
        let shape = random_shape(t.shape_count(), 2.0, &mut s.rng());
        let poses = swing_sequence(&t, &shape, &MotionConfig { frames: 4, ..Default::default() }, s.child(1));
        let mut frames = observe(&t, &shape, &poses, 0.01, 30.0, s.child(2)).unwrap();
        frames[1].confidence[4] = 0.0;
        frames[2].confidence[7] = 0.5;
        let problem = JointProblem {
            template: &t,
            frames: &frames,
            rows: frames.iter().map(confident_rows).collect(),
            shape_reg: 0.1,
            pose_reg: 0.2,
        };
        let x = JointProblem::pack(&ShapeParams::new(vec![0.3, -0.1, 0.2, 0.0]).unwrap(), &poses);
        let (r, jac) = problem.evaluate(&x);
        let (normal, jt_r) = problem.normal_equations(&r, &jac);
        let dense = jac.tr_mul(&jac);
        assert!((&normal - &dense).amax() <= 1e-12 * dense.amax());
        assert_eq!(jt_r, jac.tr_mul(&r));
    }
}
