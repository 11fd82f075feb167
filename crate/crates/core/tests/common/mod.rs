#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::Vector3;
use rand::Rng;
use synthcrowd::body_model::{build_canonical_avatar, AvatarBuildConfig, AvatarTemplate};
use synthcrowd::motion::{random_shape, swing_sequence, MotionConfig};
use synthcrowd::scanning::LabelTexture;
use synthcrowd::scene::{AvatarInstance, Camera, Environment, EnvironmentConfig, SceneGraph};
use synthcrowd::seed::SeedStream;

pub fn template() -> Arc<AvatarTemplate> {
    Arc::new(build_canonical_avatar(&AvatarBuildConfig::default()).unwrap())
}

/// 1 to 3 moving avatars in the default room, seen from a random point on
/// a ring around them.
pub fn random_scene(t: &Arc<AvatarTemplate>, seed: SeedStream, width: u32, height: u32) -> (SceneGraph, Camera) {
    let mut rng = seed.rng();
    let labels = Arc::new(LabelTexture::ground_truth(t));
    let n = rng.random_range(1..=3u8);
    let avatars = (0..n)
        .map(|k| {
            let shape = random_shape(t.shape_count(), 1.5, &mut rng);
            let poses = swing_sequence(t, &shape, &MotionConfig::default(), seed.child(u64::from(k)));
            let pose = poses[rng.random_range(0..poses.len())].clone();
            AvatarInstance { instance_id: k + 1, template: Arc::clone(t), shape, pose, labels: Arc::clone(&labels) }
        })
        .collect();
    let env = Environment::octagon(&EnvironmentConfig::default()).unwrap();
    let scene = SceneGraph::new(Some(env), avatars).unwrap();
    let azimuth = rng.random_range(0.0..std::f64::consts::TAU);
    let radius = rng.random_range(2.5..3.5);
    let eye = Vector3::new(radius * azimuth.sin(), -radius * azimuth.cos(), rng.random_range(0.8..2.4));
    let target = Vector3::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(0.6..1.2));
    let focal = 0.87 * width as f64;
    let camera = Camera::look_at("cam", eye, target, Vector3::z(), focal, width, height).unwrap();
    (scene, camera)
}

/// Nearest ray hit: camera depth, owning instance (0 for the room) and the
/// barycentric coordinates on the hit triangle.
#[derive(Debug, Clone, Copy)]
pub struct Hit {
    pub depth: f64,
    pub instance: u8,
    pub triangle: usize,
    pub bary: [f64; 3],
}

fn intersect(origin: &Vector3<f64>, dir: &Vector3<f64>, tri: [Vector3<f64>; 3]) -> Option<(f64, [f64; 3])> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-14 {
        return None;
    }
    let s = origin - tri[0];
    let u = s.dot(&p) / det;
    let q = s.cross(&e1);
    let v = dir.dot(&q) / det;
    if !(0.0..=1.0).contains(&u) || v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) / det;
    (t > 0.0).then_some((t, [1.0 - u - v, u, v]))
}

/// Brute-force ray caster over every triangle of the scene.
pub struct RayCaster {
    triangles: Vec<([Vector3<f64>; 3], u8, usize)>,
    /// Bounding sphere per avatar, to skip whole meshes.
    spheres: Vec<(Vector3<f64>, f64, std::ops::Range<usize>)>,
    room: std::ops::Range<usize>,
}

impl RayCaster {
    pub fn new(scene: &SceneGraph) -> RayCaster {
        let mut triangles = Vec::new();
        let mut spheres = Vec::new();
        for (a, mesh) in scene.avatars().iter().zip(scene.posed()) {
            let start = triangles.len();
            for (fi, f) in a.template.faces.iter().enumerate() {
                triangles.push((f.map(|i| mesh.vertices[i]), a.instance_id, fi));
            }
            let center = mesh.vertices.iter().sum::<Vector3<f64>>() / mesh.vertices.len() as f64;
            let radius = mesh.vertices.iter().map(|v| (v - center).norm()).fold(0.0, f64::max);
            spheres.push((center, radius + 1e-6, start..triangles.len()));
        }
        let start = triangles.len();
        if let Some(env) = scene.environment() {
            for (i, t) in env.triangles().iter().enumerate() {
                triangles.push((t.vertices, 0, i));
            }
        }
        let room = start..triangles.len();
        RayCaster { triangles, spheres, room }
    }

    /// Casts through pixel coordinates `(u, v)`; only hits beyond `near`
    /// camera depth count.
    pub fn cast(&self, camera: &Camera, u: f64, v: f64, near: f64) -> Option<Hit> {
        let origin = camera.center();
        let dir = camera.ray(u, v);
        let unit = dir.normalize();
        let mut best: Option<Hit> = None;
        let test = |range: std::ops::Range<usize>, best: &mut Option<Hit>| {
            for (tri, inst, idx) in &self.triangles[range] {
                if let Some((t, bary)) = intersect(&origin, &dir, *tri) {
                    if t > near && best.is_none_or(|b| t < b.depth) {
                        *best = Some(Hit { depth: t, instance: *inst, triangle: *idx, bary });
                    }
                }
            }
        };
        for (c, r, range) in &self.spheres {
            let oc = c - origin;
            let along = oc.dot(&unit);
            if (oc - unit * along).norm() <= *r {
                test(range.clone(), &mut best);
            }
        }
        test(self.room.clone(), &mut best);
        best
    }
}
