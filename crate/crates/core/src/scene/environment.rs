use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::SceneError;
use crate::scanning::classes::{FLOOR, WALL};
use crate::scanning::ClassId;

/// Octagonal room: a floor polygon at z = 0 walled in by vertical quads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    /// Counter-clockwise floor polygon in the z = 0 plane (m).
    pub floor: Vec<[f64; 2]>,
    pub wall_height: f64,
    /// Radius of the camera dome the room was sized for (m).
    pub dome_radius: f64,
}

/// Environment parameters as they appear in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvironmentConfig {
    /// Circumradius of the octagonal floor (m).
    pub floor_radius: f64,
    pub wall_height: f64,
    pub dome_radius: f64,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        EnvironmentConfig { floor_radius: 5.0, wall_height: 3.0, dome_radius: 3.0 }
    }
}

/// A world-space triangle with its semantic class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvTriangle {
    pub vertices: [Vector3<f64>; 3],
    pub class: ClassId,
}

impl Environment {
    pub fn octagon(config: &EnvironmentConfig) -> Result<Environment, SceneError> {
        let floor = (0..8)
            .map(|k| {
                // flat side facing the default front camera
                let a = std::f64::consts::PI * (k as f64 + 0.5) / 4.0;
                [config.floor_radius * a.cos(), config.floor_radius * a.sin()]
            })
            .collect();
        let env = Environment { floor, wall_height: config.wall_height, dome_radius: config.dome_radius };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let n = self.floor.len();
        if n < 3 {
            return Err(SceneError::Environment("floor needs at least 3 vertices".into()));
        }
        if !(self.wall_height > 0.0) || !(self.dome_radius > 0.0) {
            return Err(SceneError::Environment("wall height and dome radius must be positive".into()));
        }
        let pts: Vec<Vector2<f64>> = self.floor.iter().map(|p| Vector2::new(p[0], p[1])).collect();
        if pts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(SceneError::Environment("non-finite floor vertex".into()));
        }
        let cross = |a: Vector2<f64>, b: Vector2<f64>| a.x * b.y - a.y * b.x;
        // strictly convex and counter-clockwise implies simple
        for i in 0..n {
            let (a, b, c) = (pts[i], pts[(i + 1) % n], pts[(i + 2) % n]);
            if cross(b - a, c - b) <= 0.0 {
                return Err(SceneError::Environment("floor polygon must be convex and counter-clockwise".into()));
            }
        }
        if !self.contains_disc(self.dome_radius) {
            return Err(SceneError::Environment(format!(
                "dome radius {} does not fit inside the walls",
                self.dome_radius
            )));
        }
        Ok(())
    }

    /// Whether the disc of radius `r` about the origin lies inside the floor.
    pub fn contains_disc(&self, r: f64) -> bool {
        let n = self.floor.len();
        (0..n).all(|i| {
            let a = Vector2::from(self.floor[i]);
            let b = Vector2::from(self.floor[(i + 1) % n]);
            let edge = b - a;
            // signed distance of the origin to the edge line, inside positive
            let d = (edge.x * (-a.y) - edge.y * (-a.x)) / edge.norm();
            d >= r
        })
    }

    pub fn triangles(&self) -> Vec<EnvTriangle> {
        let n = self.floor.len();
        let p = |i: usize, z: f64| Vector3::new(self.floor[i % n][0], self.floor[i % n][1], z);
        let mut out = Vec::with_capacity(3 * n);
        for i in 1..n - 1 {
            out.push(EnvTriangle { vertices: [p(0, 0.0), p(i, 0.0), p(i + 1, 0.0)], class: FLOOR });
        }
        for i in 0..n {
            let (a0, b0) = (p(i, 0.0), p(i + 1, 0.0));
            let (a1, b1) = (p(i, self.wall_height), p(i + 1, self.wall_height));
            out.push(EnvTriangle { vertices: [a0, b0, b1], class: WALL });
            out.push(EnvTriangle { vertices: [a0, b1, a1], class: WALL });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_octagon_is_valid_and_encloses_the_dome() {
        let env = Environment::octagon(&EnvironmentConfig::default()).unwrap();
        assert_eq!(env.floor.len(), 8);
        assert!(env.contains_disc(3.0));
        let tris = env.triangles();
        assert_eq!(tris.iter().filter(|t| t.class == FLOOR).count(), 6);
        assert_eq!(tris.iter().filter(|t| t.class == WALL).count(), 16);
    }

    #[test]
    fn rejects_bad_rooms() {
        let small = EnvironmentConfig { floor_radius: 2.0, ..Default::default() };
        assert!(Environment::octagon(&small).is_err());
        let mut env = Environment::octagon(&EnvironmentConfig::default()).unwrap();
        env.floor.swap(2, 5);
        assert!(env.validate().is_err());
    }
}
