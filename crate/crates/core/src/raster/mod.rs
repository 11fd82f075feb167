//! Software z-buffer rasterizer producing every annotation channel of a
//! frame.
//!
//! Triangles are clipped against a near plane, projected, and scanned over
//! pixel centers `(x + 0.5, y + 0.5)` with perspective-correct
//! interpolation. Depth is camera-frame z. Floors receive planar cast shadows
//! from the avatars so background-only and full renders differ where
//! shadows fall.

mod frame;
mod quantize;

pub use frame::{AvatarJoints, FrameBuffer, JointRecord, RenderReport};
pub use quantize::{dequantize_uv, quantize_depth, quantize_uv, DepthQuantizer};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scanning::classes::{albedo, ClassId, FLOOR, SKIN, UNLABELED};
use crate::scene::{Camera, SceneGraph};

#[derive(Debug, Error, PartialEq)]
pub enum RasterError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Joints sit this far inside the body surface (m).
pub const SKIN_OFFSET: f64 = 0.03;

/// A single directional light with an ambient floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Light {
    /// Direction the light travels (world, need not be normalised).
    pub direction: [f64; 3],
    pub ambient: f64,
}

impl Default for Light {
    fn default() -> Self {
        Light { direction: [0.35, 0.25, -1.0], ambient: 0.35 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub light: Light,
    pub shadows: bool,
    pub quantizer: DepthQuantizer,
    /// Camera-frame near clipping distance (m).
    pub near_clip: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { light: Light::default(), shadows: true, quantizer: DepthQuantizer::default(), near_clip: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Surface {
    Empty,
    Environment { class: ClassId },
    Avatar { index: usize, u: f64, v: f64 },
}

struct Target {
    width: usize,
    height: usize,
    depth: Vec<f64>,
    surface: Vec<Surface>,
    shade: Vec<f64>,
}

/// Pinhole intrinsics and world-to-camera transform, hoisted once per frame.
struct View<'a> {
    camera: &'a Camera,
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
    near: f64,
}

impl View<'_> {
    fn to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }
}

/// A clipped polygon vertex: camera-space position and its barycentric
/// weights with respect to the source triangle.
#[derive(Clone, Copy)]
struct ClipVertex {
    q: Vector3<f64>,
    bary: [f64; 3],
}

fn clip_near(q: [Vector3<f64>; 3], near: f64) -> Vec<ClipVertex> {
    let src = [
        ClipVertex { q: q[0], bary: [1.0, 0.0, 0.0] },
        ClipVertex { q: q[1], bary: [0.0, 1.0, 0.0] },
        ClipVertex { q: q[2], bary: [0.0, 0.0, 1.0] },
    ];
    if src.iter().all(|v| v.q.z >= near) {
        return src.to_vec();
    }
    let mut out = Vec::with_capacity(4);
    for i in 0..3 {
        let a = src[i];
        let b = src[(i + 1) % 3];
        let (ina, inb) = (a.q.z >= near, b.q.z >= near);
        if ina {
            out.push(a);
        }
        if ina != inb {
            let t = (near - a.q.z) / (b.q.z - a.q.z);
            let mut bary = [0.0; 3];
            for k in 0..3 {
                bary[k] = a.bary[k] + t * (b.bary[k] - a.bary[k]);
            }
            let mut q = a.q + (b.q - a.q) * t;
            q.z = near;
            out.push(ClipVertex { q, bary });
        }
    }
    out
}

/// Scan-converts a camera-space triangle. `visit` receives the pixel index,
/// camera depth and perspective-correct barycentrics of the source triangle.
/// Returns whether anything survived clipping.
fn scan_triangle(
    view: &View,
    width: usize,
    height: usize,
    q: [Vector3<f64>; 3],
    mut visit: impl FnMut(usize, f64, [f64; 3]),
) -> bool {
    let poly = clip_near(q, view.near);
    if poly.len() < 3 {
        return false;
    }
    let cam = view.camera;
    let screen: Vec<(f64, f64, f64)> =
        poly.iter().map(|v| (cam.fx * v.q.x / v.q.z + cam.cx, cam.fy * v.q.y / v.q.z + cam.cy, v.q.z)).collect();
    for k in 1..poly.len() - 1 {
        let idx = [0, k, k + 1];
        let s = idx.map(|i| screen[i]);
        let area = (s[1].0 - s[0].0) * (s[2].1 - s[0].1) - (s[2].0 - s[0].0) * (s[1].1 - s[0].1);
        if area.abs() < 1e-12 {
            continue;
        }
        let min_x = s.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let max_x = s.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let min_y = s.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let max_y = s.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let x0 = (min_x - 0.5).ceil().max(0.0) as i64;
        let x1 = ((max_x - 0.5).floor() as i64).min(width as i64 - 1);
        let y0 = (min_y - 0.5).ceil().max(0.0) as i64;
        let y1 = ((max_y - 0.5).floor() as i64).min(height as i64 - 1);
        if x0 > x1 || y0 > y1 {
            continue;
        }
        let inv_area = 1.0 / area;
        for y in y0..=y1 {
            let py = y as f64 + 0.5;
            for x in x0..=x1 {
                let px = x as f64 + 0.5;
                let e0 = ((s[2].0 - s[1].0) * (py - s[1].1) - (s[2].1 - s[1].1) * (px - s[1].0)) * inv_area;
                let e1 = ((s[0].0 - s[2].0) * (py - s[2].1) - (s[0].1 - s[2].1) * (px - s[2].0)) * inv_area;
                let e2 = 1.0 - e0 - e1;
                if e0 < 0.0 || e1 < 0.0 || e2 < 0.0 {
                    continue;
                }
                let w = [e0 / s[0].2, e1 / s[1].2, e2 / s[2].2];
                let inv_z = w[0] + w[1] + w[2];
                let z = 1.0 / inv_z;
                let mut bary = [0.0; 3];
                for (j, &i) in idx.iter().enumerate() {
                    let b = w[j] * z;
                    for c in 0..3 {
                        bary[c] += b * poly[i].bary[c];
                    }
                }
                visit(y as usize * width + x as usize, z, bary);
            }
        }
    }
    true
}

fn lambert(normal: Vector3<f64>, light: &Light) -> f64 {
    let to_light = -Vector3::from(light.direction).normalize();
    light.ambient + (1.0 - light.ambient) * normal.dot(&to_light).max(0.0)
}

/// Face normal oriented toward the viewer; `None` for zero-area triangles.
fn facing_normal(p: &[Vector3<f64>; 3], eye: &Vector3<f64>) -> Option<Vector3<f64>> {
    let n = (p[1] - p[0]).cross(&(p[2] - p[0]));
    let len = n.norm();
    if !(len > 1e-14) {
        return None;
    }
    let n = n / len;
    Some(if n.dot(&(eye - p[0])) < 0.0 { -n } else { n })
}

pub fn render(scene: &SceneGraph, camera: &Camera) -> FrameBuffer {
    render_with(scene, camera, &RenderOptions::default())
}

pub fn render_with(scene: &SceneGraph, camera: &Camera, options: &RenderOptions) -> FrameBuffer {
    let width = camera.width as usize;
    let height = camera.height as usize;
    let view = View {
        camera,
        rotation: camera.rotation_matrix(),
        translation: Vector3::from(camera.translation),
        near: options.near_clip,
    };
    let eye = camera.center();
    let mut target = Target {
        width,
        height,
        depth: vec![f64::INFINITY; width * height],
        surface: vec![Surface::Empty; width * height],
        shade: vec![0.0; width * height],
    };
    let mut report = RenderReport::default();

    if let Some(env) = scene.environment() {
        for tri in env.triangles() {
            report.triangles += 1;
            let Some(n) = facing_normal(&tri.vertices, &eye) else {
                report.degenerate += 1;
                continue;
            };
            let shade = lambert(n, &options.light);
            let q = tri.vertices.map(|p| view.to_camera(&p));
            let drawn = scan_triangle(&view, width, height, q, |i, z, _| {
                if z < target.depth[i] {
                    target.depth[i] = z;
                    target.surface[i] = Surface::Environment { class: tri.class };
                    target.shade[i] = shade;
                }
            });
            if !drawn {
                report.clipped += 1;
            }
        }
    }

    for (index, (avatar, mesh)) in scene.avatars().iter().zip(scene.posed()).enumerate() {
        let template = &avatar.template;
        let cam_vertices: Vec<Vector3<f64>> = mesh.vertices.iter().map(|p| view.to_camera(p)).collect();
        for (face, uv) in template.faces.iter().zip(&template.uv_coords) {
            report.triangles += 1;
            let world = face.map(|v| mesh.vertices[v]);
            let Some(n) = facing_normal(&world, &eye) else {
                report.degenerate += 1;
                continue;
            };
            let shade = lambert(n, &options.light);
            let q = face.map(|v| cam_vertices[v]);
            let drawn = scan_triangle(&view, width, height, q, |i, z, b| {
                if z < target.depth[i] {
                    target.depth[i] = z;
                    let u = b[0] * uv[0][0] + b[1] * uv[1][0] + b[2] * uv[2][0];
                    let v = b[0] * uv[0][1] + b[1] * uv[1][1] + b[2] * uv[2][1];
                    target.surface[i] = Surface::Avatar { index, u, v };
                    target.shade[i] = shade;
                }
            });
            if !drawn {
                report.clipped += 1;
            }
        }
    }

    let mut shadowed = vec![false; width * height];
    if options.shadows && scene.environment().is_some() {
        cast_floor_shadows(scene, &view, options, &target, &mut shadowed);
    }

    let mut fb = FrameBuffer::empty(camera.width, camera.height);
    fb.report = report;
    let ambient = options.light.ambient;
    for i in 0..width * height {
        let (class, shade) = match target.surface[i] {
            Surface::Empty => continue,
            Surface::Environment { class } => {
                let shade = if shadowed[i] { ambient } else { target.shade[i] };
                (class, shade)
            }
            Surface::Avatar { index, u, v } => {
                let avatar = &scene.avatars()[index];
                let uq = quantize_uv(u.clamp(0.0, 1.0)).expect("clamped");
                let vq = quantize_uv(v.clamp(0.0, 1.0)).expect("clamped");
                let label = avatar.labels.get(uq, vq);
                fb.u_q[i] = uq;
                fb.v_q[i] = vq;
                fb.instance[i] = avatar.instance_id;
                (if label == UNLABELED { SKIN } else { label }, target.shade[i])
            }
        };
        let d = target.depth[i];
        fb.depth_m[i] = d;
        fb.depth_q[i] = options.quantizer.quantize(d).expect("positive depth");
        fb.semantic[i] = class;
        let c = albedo(class);
        for k in 0..3 {
            fb.rgb[3 * i + k] = (c[k] as f64 * shade).round().clamp(0.0, 255.0) as u8;
        }
    }

    let visible = joint_visibility_with(scene, camera, &fb, &options.quantizer);
    fb.avatars = scene
        .avatars()
        .iter()
        .zip(scene.posed())
        .zip(visible)
        .map(|((avatar, mesh), vis)| AvatarJoints {
            instance_id: avatar.instance_id,
            joints: mesh
                .joints
                .iter()
                .zip(vis)
                .map(|(p, visible)| {
                    let proj = camera.project(p);
                    JointRecord {
                        position: [p.x, p.y, p.z],
                        pixel: proj.map(|q| [q.u, q.v]),
                        depth: proj.map(|q| q.depth),
                        visible,
                    }
                })
                .collect(),
        })
        .collect();
    fb
}

/// Marks floor pixels inside the planar projection of the avatars along the
/// light direction.
fn cast_floor_shadows(
    scene: &SceneGraph,
    view: &View,
    options: &RenderOptions,
    target: &Target,
    shadowed: &mut [bool],
) {
    let dir = Vector3::from(options.light.direction);
    if dir.z >= -1e-9 {
        return;
    }
    let to_floor = |p: &Vector3<f64>| p - dir * (p.z.max(0.0) / dir.z);
    for (avatar, mesh) in scene.avatars().iter().zip(scene.posed()) {
        let projected: Vec<Vector3<f64>> = mesh.vertices.iter().map(|p| view.to_camera(&to_floor(p))).collect();
        for face in &avatar.template.faces {
            let q = face.map(|v| projected[v]);
            scan_triangle(view, target.width, target.height, q, |i, z, _| {
                if let Surface::Environment { class: FLOOR } = target.surface[i] {
                    if (z - target.depth[i]).abs() <= 1e-6 * z.max(1.0) {
                        shadowed[i] = true;
                    }
                }
            });
        }
    }
}

/// Per avatar, per joint: inside the image, in front of the camera, and the
/// z-buffer within two depth bins of the joint depth minus the skin offset.
pub fn joint_visibility(scene: &SceneGraph, camera: &Camera, frame: &FrameBuffer) -> Vec<Vec<bool>> {
    joint_visibility_with(scene, camera, frame, &DepthQuantizer::default())
}

pub fn joint_visibility_with(
    scene: &SceneGraph,
    camera: &Camera,
    frame: &FrameBuffer,
    quantizer: &DepthQuantizer,
) -> Vec<Vec<bool>> {
    let tolerance = 2.0 * quantizer.bin_width();
    scene
        .posed()
        .iter()
        .map(|mesh| {
            mesh.joints
                .iter()
                .map(|p| {
                    let Some(q) = camera.project(p) else { return false };
                    if !camera.contains_pixel(q.u, q.v) || q.u as u32 >= frame.width || q.v as u32 >= frame.height {
                        return false;
                    }
                    let zbuf = frame.depth_m[q.v as usize * frame.width as usize + q.u as usize];
                    zbuf > 0.0 && (zbuf - (q.depth - SKIN_OFFSET)).abs() <= tolerance
                })
                .collect()
        })
        .collect()
}
