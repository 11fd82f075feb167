use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BodyModelError;

const SUM_TOLERANCE: f64 = 1e-9;
pub(crate) const MAX_INFLUENCES: usize = 4;

/// Body part a texture chart belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyRegion {
    Torso,
    Neck,
    Head,
    UpperArm,
    Forearm,
    Wrist,
    Hand,
    Thigh,
    Shin,
    Foot,
}

/// One rectangle of the UV atlas. `surface` is the sub-rectangle holding the
/// lathed side surface: `u` runs around the part starting at its front, `v`
/// runs along its axis at one texture unit per meter. Cap discs live in
/// `caps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub name: String,
    pub region: BodyRegion,
    pub owner_joint: usize,
    /// `[u0, v0, u1, v1]`
    pub rect: [f64; 4],
    pub surface: [f64; 4],
    pub caps: Vec<[f64; 4]>,
}

impl Chart {
    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.rect[0] && u <= self.rect[2] && v >= self.rect[1] && v <= self.rect[3]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atlas {
    pub charts: Vec<Chart>,
    /// UV of the surface ring each joint is regressed from, one per joint.
    pub joint_anchors: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkinInfluence {
    pub joint: usize,
    pub weight: f64,
}

/// Canonical avatar. Sparse rows stand in for the dense `N×V` regressor and
/// `V×N` skinning matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvatarTemplate {
    pub joint_names: Vec<String>,
    /// `None` marks the root; otherwise `parents[i] < i`.
    pub parents: Vec<Option<usize>>,
    pub distal_joints: Vec<usize>,
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    /// Per face corner.
    pub uv_coords: Vec<[[f64; 2]; 3]>,
    /// `M` arrays of per-vertex displacements (meters per unit coefficient).
    pub blendshapes: Vec<Vec<[f64; 3]>>,
    pub joint_regressor: Vec<Vec<(usize, f64)>>,
    pub skin_weights: Vec<Vec<SkinInfluence>>,
    pub atlas: Atlas,
}

impl AvatarTemplate {
    pub fn joint_count(&self) -> usize {
        self.parents.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn shape_count(&self) -> usize {
        self.blendshapes.len()
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joint_names.iter().position(|n| n == name)
    }

    /// True when `joint` lies in the subtree rooted at `ancestor` (inclusive).
    pub fn is_descendant(&self, joint: usize, ancestor: usize) -> bool {
        let mut cur = Some(joint);
        while let Some(j) = cur {
            if j == ancestor {
                return true;
            }
            cur = self.parents[j];
        }
        false
    }

    pub fn validate(&self) -> Result<(), BodyModelError> {
        let n = self.joint_count();
        let v = self.vertex_count();
        let bad = |msg: String| Err(BodyModelError::Template(msg));

        if n == 0 {
            return bad("no joints".into());
        }
        if self.joint_names.len() != n {
            return bad(format!("{} joint names for {n} joints", self.joint_names.len()));
        }
        if self.parents[0].is_some() {
            return bad("joint 0 must be the root".into());
        }
        for (i, p) in self.parents.iter().enumerate().skip(1) {
            match p {
                Some(p) if *p < i => {}
                _ => return bad(format!("joint {i} must have a parent with a smaller index")),
            }
        }
        if let Some(&j) = self.distal_joints.iter().find(|&&j| j >= n) {
            return bad(format!("distal joint {j} out of range"));
        }
        if self.vertices.iter().flatten().any(|c| !c.is_finite()) {
            return bad("non-finite vertex".into());
        }
        if self.uv_coords.len() != self.faces.len() {
            return bad("uv_coords must hold one entry per face".into());
        }
        for (f, face) in self.faces.iter().enumerate() {
            if face.iter().any(|&i| i >= v) {
                return bad(format!("face {f} references a missing vertex"));
            }
        }
        for uv in self.uv_coords.iter().flatten() {
            if !(0.0..=1.0).contains(&uv[0]) || !(0.0..=1.0).contains(&uv[1]) {
                return bad(format!("uv {:?} outside the unit square", uv));
            }
        }
        for (k, shape) in self.blendshapes.iter().enumerate() {
            if shape.len() != v {
                return bad(format!("blendshape {k} has {} entries for {v} vertices", shape.len()));
            }
        }
        if self.joint_regressor.len() != n {
            return bad("joint regressor must have one row per joint".into());
        }
        for (j, row) in self.joint_regressor.iter().enumerate() {
            if row.iter().any(|&(i, w)| i >= v || !(w >= 0.0)) {
                return bad(format!("regressor row {j} has an invalid entry"));
            }
            let sum: f64 = row.iter().map(|&(_, w)| w).sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return bad(format!("regressor row {j} sums to {sum}"));
            }
        }
        if self.skin_weights.len() != v {
            return bad("skin weights must have one row per vertex".into());
        }
        for (i, row) in self.skin_weights.iter().enumerate() {
            if row.is_empty() || row.len() > MAX_INFLUENCES {
                return bad(format!("vertex {i} has {} influences", row.len()));
            }
            if row.iter().any(|s| s.joint >= n || !(s.weight >= 0.0)) {
                return bad(format!("vertex {i} has an invalid influence"));
            }
            let sum: f64 = row.iter().map(|s| s.weight).sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return bad(format!("skin weights of vertex {i} sum to {sum}"));
            }
        }
        if self.atlas.joint_anchors.len() != n {
            return bad("atlas must anchor every joint".into());
        }
        let charts = &self.atlas.charts;
        for (a, ca) in charts.iter().enumerate() {
            for cb in &charts[a + 1..] {
                let overlap = ca.rect[0] < cb.rect[2]
                    && cb.rect[0] < ca.rect[2]
                    && ca.rect[1] < cb.rect[3]
                    && cb.rect[1] < ca.rect[3];
                if overlap {
                    return bad(format!("charts {} and {} overlap", ca.name, cb.name));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("template serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, BodyModelError> {
        let template: AvatarTemplate = serde_json::from_str(text).map_err(|e| BodyModelError::Json(e.to_string()))?;
        template.validate()?;
        Ok(template)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self, BodyModelError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| BodyModelError::Json(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
