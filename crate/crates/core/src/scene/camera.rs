use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::SceneError;

pub const DEFAULT_WIDTH: u32 = 388;
pub const DEFAULT_HEIGHT: u32 = 288;
/// About 60° horizontal field of view at the default width.
pub const DEFAULT_FOCAL: f64 = 336.0;

/// Pinhole camera. The camera frame has x to the right, y down and z along
/// the optical axis; `rotation`/`translation` map world points into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Camera {
    pub id: String,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// World-to-camera rotation, row-major.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    pub width: u32,
    pub height: u32,
}

/// A point in front of the camera: pixel coordinates and camera-frame depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
}

impl Camera {
    /// Camera at `eye` looking at `target`, with world `up` projecting to
    /// image up. Principal point at the image center.
    pub fn look_at(
        id: impl Into<String>,
        eye: Vector3<f64>,
        target: Vector3<f64>,
        up: Vector3<f64>,
        focal: f64,
        width: u32,
        height: u32,
    ) -> Result<Camera, SceneError> {
        let forward = target - eye;
        if forward.norm() < 1e-12 {
            return Err(SceneError::Argument("camera eye coincides with its target".into()));
        }
        let z = forward.normalize();
        let mut x = z.cross(&up);
        if x.norm() < 1e-9 {
            // looking along `up`: any horizontal right vector will do
            x = z.cross(&Vector3::y());
        }
        let x = x.normalize();
        let y = z.cross(&x);
        let rotation = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
        let t = -(rotation * eye);
        let camera = Camera {
            id: id.into(),
            fx: focal,
            fy: focal,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            rotation: [[x.x, x.y, x.z], [y.x, y.y, y.z], [z.x, z.y, z.z]],
            translation: [t.x, t.y, t.z],
            width,
            height,
        };
        camera.validate()?;
        Ok(camera)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let finite = [self.fx, self.fy, self.cx, self.cy].iter().all(|v| v.is_finite())
            && self.rotation.iter().flatten().all(|v| v.is_finite())
            && self.translation.iter().all(|v| v.is_finite());
        if !finite {
            return Err(SceneError::Camera(self.id.clone(), "non-finite parameters".into()));
        }
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(SceneError::Camera(self.id.clone(), "focal lengths must be positive".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(SceneError::Camera(self.id.clone(), "empty image".into()));
        }
        let r = self.rotation_matrix();
        if (r.transpose() * r - Matrix3::identity()).amax() > 1e-9 || (r.determinant() - 1.0).abs() > 1e-9 {
            return Err(SceneError::Camera(self.id.clone(), "rotation is not orthonormal with det +1".into()));
        }
        Ok(())
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        let r = &self.rotation;
        Matrix3::new(r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2])
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Vector3<f64> {
        -(self.rotation_matrix().transpose() * Vector3::from(self.translation))
    }

    /// Unit optical axis in world coordinates.
    pub fn forward(&self) -> Vector3<f64> {
        Vector3::from(self.rotation[2])
    }

    pub fn to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation_matrix() * p + Vector3::from(self.translation)
    }

    /// `None` when the point is on or behind the camera plane.
    pub fn project(&self, p: &Vector3<f64>) -> Option<Projection> {
        self.project_camera(&self.to_camera(p))
    }

    pub fn project_camera(&self, q: &Vector3<f64>) -> Option<Projection> {
        if q.z <= 0.0 {
            return None;
        }
        Some(Projection { u: self.fx * q.x / q.z + self.cx, v: self.fy * q.y / q.z + self.cy, depth: q.z })
    }

    /// World point at camera depth `depth` behind pixel coordinates `(u, v)`.
    pub fn unproject(&self, u: f64, v: f64, depth: f64) -> Vector3<f64> {
        let q = Vector3::new((u - self.cx) / self.fx * depth, (v - self.cy) / self.fy * depth, depth);
        self.rotation_matrix().transpose() * (q - Vector3::from(self.translation))
    }

    /// Direction (world, unnormalised, unit camera depth) of the ray through
    /// `(u, v)`.
    pub fn ray(&self, u: f64, v: f64) -> Vector3<f64> {
        self.rotation_matrix().transpose() * Vector3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }

    pub fn contains_pixel(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64
    }
}

/// Dome ring parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RingConfig {
    pub count: usize,
    /// Horizontal distance from the target (m).
    pub radius: f64,
    /// Camera heights alternate between the two ends (m).
    pub height_range: (f64, f64),
    pub target: [f64; 3],
    pub focal: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for RingConfig {
    fn default() -> Self {
        RingConfig {
            count: 20,
            radius: 3.0,
            height_range: (1.2, 2.0),
            target: [0.0, 0.0, 0.9],
            focal: DEFAULT_FOCAL,
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
        }
    }
}

/// `count` cameras evenly spaced in azimuth around `target`, all looking at
/// it. Azimuth 0 sits in front of an avatar facing −y; heights alternate
/// between the ends of `height_range`.
pub fn make_dome_cameras(config: &RingConfig) -> Result<Vec<Camera>, SceneError> {
    if config.count == 0 {
        return Err(SceneError::Argument("camera count must be at least 1".into()));
    }
    if !(config.radius > 0.0) {
        return Err(SceneError::Argument(format!("ring radius {} must be positive", config.radius)));
    }
    let target = Vector3::from(config.target);
    (0..config.count)
        .map(|k| {
            let azimuth = 2.0 * std::f64::consts::PI * k as f64 / config.count as f64;
            let h = if k % 2 == 0 { config.height_range.0 } else { config.height_range.1 };
            let eye =
                Vector3::new(target.x + config.radius * azimuth.sin(), target.y - config.radius * azimuth.cos(), h);
            Camera::look_at(format!("cam_{k:02}"), eye, target, Vector3::z(), config.focal, config.width, config.height)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn camera() -> Camera {
        Camera::look_at("c", Vector3::new(0.3, -3.0, 1.6), Vector3::new(0.0, 0.0, 0.9), Vector3::z(), 336.0, 388, 288)
            .unwrap()
    }

    #[test]
    fn optical_axis_projects_to_principal_point() {
        let c = camera();
        let p = c.center() + c.forward() * 2.5;
        let q = c.project(&p).unwrap();
        assert!((q.u - c.cx).abs() < 1e-9 && (q.v - c.cy).abs() < 1e-9);
        assert!((q.depth - 2.5).abs() < 1e-12);
    }

    #[test]
    fn points_behind_are_rejected() {
        let c = camera();
        assert!(c.project(&(c.center() - c.forward())).is_none());
        assert!(c.project(&c.center()).is_none());
    }

    #[test]
    fn image_up_is_world_up() {
        let c = camera();
        let low = c.project(&Vector3::new(0.0, 0.0, 0.5)).unwrap();
        let high = c.project(&Vector3::new(0.0, 0.0, 1.5)).unwrap();
        assert!(high.v < low.v);
        // +x (the left side of an avatar facing the camera) lands on the right
        let right = c.project(&Vector3::new(0.5, 0.0, 0.9)).unwrap();
        assert!(right.u > c.cx);
    }

    #[test]
    fn matches_matrix_oracle() {
        let c = camera();
        let k = Matrix3::new(c.fx, 0.0, c.cx, 0.0, c.fy, c.cy, 0.0, 0.0, 1.0);
        for p in [Vector3::new(0.1, 0.2, 0.3), Vector3::new(-1.0, 1.0, 2.0), Vector3::new(0.7, -0.4, 0.0)] {
            let h = k * (c.rotation_matrix() * p + Vector3::from(c.translation));
            let q = c.project(&p).unwrap();
            assert!((q.u - h.x / h.z).abs() < 1e-9 && (q.v - h.y / h.z).abs() < 1e-9);
        }
    }

    #[test]
    fn ring_validation() {
        assert!(make_dome_cameras(&RingConfig { count: 0, ..Default::default() }).is_err());
        assert!(make_dome_cameras(&RingConfig { radius: 0.0, ..Default::default() }).is_err());
        let one = make_dome_cameras(&RingConfig { count: 1, ..Default::default() }).unwrap();
        let c = one[0].center();
        assert!(c.x.abs() < 1e-12 && c.y < 0.0);
    }
}
