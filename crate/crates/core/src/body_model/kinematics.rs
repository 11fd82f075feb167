//! Shaping, forward kinematics, skinning and the analytic joint Jacobian.

use nalgebra::{DMatrix, Matrix3, Vector3};

use super::rotation::{right_jacobian, rodrigues, skew};
use super::{AvatarTemplate, BodyModelError, PoseParams, PosedMesh, ShapeParams};

fn check_shape(template: &AvatarTemplate, shape: &ShapeParams) -> Result<(), BodyModelError> {
    if shape.len() != template.shape_count() {
        return Err(BodyModelError::Dimension {
            what: "shape coefficients",
            expected: template.shape_count(),
            got: shape.len(),
        });
    }
    if shape.beta.iter().any(|b| !b.is_finite()) {
        return Err(BodyModelError::NonFinite("shape coefficient"));
    }
    Ok(())
}

fn check_pose(template: &AvatarTemplate, pose: &PoseParams) -> Result<(), BodyModelError> {
    if pose.joint_count() != template.joint_count() {
        return Err(BodyModelError::Dimension {
            what: "joint rotations",
            expected: template.joint_count(),
            got: pose.joint_count(),
        });
    }
    if pose.axis_angles.iter().flatten().chain(&pose.root_translation).any(|c| !c.is_finite()) {
        return Err(BodyModelError::NonFinite("pose parameter"));
    }
    Ok(())
}

fn shaped_vertex(template: &AvatarTemplate, shape: &ShapeParams, v: usize) -> Vector3<f64> {
    let mut p = Vector3::from(template.vertices[v]);
    for (k, &b) in shape.beta.iter().enumerate() {
        p += Vector3::from(template.blendshapes[k][v]) * b;
    }
    p
}

/// Template vertices displaced by the shape blendshapes.
pub fn apply_shape(template: &AvatarTemplate, shape: &ShapeParams) -> Result<Vec<Vector3<f64>>, BodyModelError> {
    check_shape(template, shape)?;
    Ok((0..template.vertex_count()).map(|v| shaped_vertex(template, shape, v)).collect())
}

/// Rest-pose joints of the shaped template.
pub fn rest_joints(template: &AvatarTemplate, shape: &ShapeParams) -> Result<Vec<Vector3<f64>>, BodyModelError> {
    check_shape(template, shape)?;
    Ok(regress(template, |v| shaped_vertex(template, shape, v)))
}

fn regress(template: &AvatarTemplate, vertex: impl Fn(usize) -> Vector3<f64>) -> Vec<Vector3<f64>> {
    template
        .joint_regressor
        .iter()
        .map(|row| row.iter().fold(Vector3::zeros(), |acc, &(v, w)| acc + vertex(v) * w))
        .collect()
}

struct Chain {
    world_rotations: Vec<Matrix3<f64>>,
    positions: Vec<Vector3<f64>>,
    /// `positions[i] - world_rotations[i] * rest[i]`, accumulated so that the
    /// identity pose yields exact zeros.
    skin_offsets: Vec<Vector3<f64>>,
}

fn forward(template: &AvatarTemplate, rest: &[Vector3<f64>], pose: &PoseParams) -> Chain {
    let n = template.joint_count();
    let mut world_rotations = Vec::with_capacity(n);
    let mut positions = Vec::with_capacity(n);
    let mut skin_offsets = Vec::with_capacity(n);
    for i in 0..n {
        let local = rodrigues(&pose.rotation(i));
        let pivot = rest[i] - local * rest[i];
        match template.parents[i] {
            None => {
                world_rotations.push(local);
                skin_offsets.push(pose.translation() + pivot);
            }
            Some(p) => {
                skin_offsets.push(skin_offsets[p] + world_rotations[p] * pivot);
                world_rotations.push(world_rotations[p] * local);
            }
        }
        // equals parent position + A_parent (rest_i - rest_parent)
        positions.push(skin_offsets[i] + world_rotations[i] * rest[i]);
    }
    Chain { world_rotations, positions, skin_offsets }
}

/// Posed vertices (linear blend skinning) and joints.
pub fn pose_mesh(
    template: &AvatarTemplate,
    shape: &ShapeParams,
    pose: &PoseParams,
) -> Result<PosedMesh, BodyModelError> {
    check_pose(template, pose)?;
    let shaped = apply_shape(template, shape)?;
    let rest = regress(template, |v| shaped[v]);
    let chain = forward(template, &rest, pose);
    let vertices = shaped
        .iter()
        .zip(&template.skin_weights)
        .map(|(v, influences)| {
            // blend the transforms, then apply once
            let mut rot = Matrix3::zeros();
            let mut offset = Vector3::zeros();
            for s in influences {
                rot += chain.world_rotations[s.joint] * s.weight;
                offset += chain.skin_offsets[s.joint] * s.weight;
            }
            rot * v + offset
        })
        .collect();
    Ok(PosedMesh { vertices, joints: chain.positions })
}

/// Posed joints only; identical to `pose_mesh(..).joints`.
pub fn joint_positions(
    template: &AvatarTemplate,
    shape: &ShapeParams,
    pose: &PoseParams,
) -> Result<Vec<Vector3<f64>>, BodyModelError> {
    check_pose(template, pose)?;
    let rest = rest_joints(template, shape)?;
    Ok(forward(template, &rest, pose).positions)
}

/// Joint positions with their derivatives. Columns are ordered
/// `[beta (M) | axis angles (3N, joint-major) | root translation (3)]`, rows
/// `3·joint + coordinate`.
#[derive(Debug, Clone)]
pub struct JointJacobian {
    pub joints: Vec<Vector3<f64>>,
    pub matrix: DMatrix<f64>,
}

impl JointJacobian {
    pub fn shape_columns(&self, m: usize) -> std::ops::Range<usize> {
        0..m
    }

    pub fn rotation_columns(&self, m: usize, joint: usize) -> std::ops::Range<usize> {
        m + 3 * joint..m + 3 * joint + 3
    }

    pub fn translation_columns(&self) -> std::ops::Range<usize> {
        self.matrix.ncols() - 3..self.matrix.ncols()
    }
}

pub fn joint_jacobian(
    template: &AvatarTemplate,
    shape: &ShapeParams,
    pose: &PoseParams,
) -> Result<JointJacobian, BodyModelError> {
    check_pose(template, pose)?;
    let rest = rest_joints(template, shape)?;
    let n = template.joint_count();
    let m = template.shape_count();
    let chain = forward(template, &rest, pose);
    let mut jac = DMatrix::zeros(3 * n, m + 3 * n + 3);

    // translation
    for i in 0..n {
        for c in 0..3 {
            jac[(3 * i + c, m + 3 * n + c)] = 1.0;
        }
    }

    // shape: the regressed rest joints are linear in beta
    for k in 0..m {
        let basis = regress(template, |v| Vector3::from(template.blendshapes[k][v]));
        let mut d: Vec<Vector3<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let di = match template.parents[i] {
                None => basis[i],
                Some(p) => d[p] + chain.world_rotations[p] * (basis[i] - basis[p]),
            };
            jac.fixed_view_mut::<3, 1>(3 * i, k).copy_from(&di);
            d.push(di);
        }
    }

    // rotations: joint j moves its strict descendants only
    let jr: Vec<Matrix3<f64>> = (0..n).map(|j| right_jacobian(&pose.rotation(j))).collect();
    for i in 0..n {
        let mut ancestor = template.parents[i];
        while let Some(j) = ancestor {
            let a = &chain.world_rotations[j];
            let local = a.transpose() * (chain.positions[i] - chain.positions[j]);
            let block = -(a * skew(&local) * jr[j]);
            jac.fixed_view_mut::<3, 3>(3 * i, m + 3 * j).copy_from(&block);
            ancestor = template.parents[j];
        }
    }
    Ok(JointJacobian { joints: chain.positions, matrix: jac })
}
