use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EvalError, Skeleton2d};
use crate::body_model::AvatarTemplate;
use crate::raster::dequantize_uv;

/// Default disc radius in texture units.
pub const DEFAULT_DISC_RADIUS: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDisc {
    pub name: String,
    pub center: [f64; 2],
    pub radius: f64,
}

/// Texture-space disc per joint around the surface ring the joint is
/// regressed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointTextureMap {
    pub joints: Vec<JointDisc>,
}

impl JointTextureMap {
    pub fn from_template(template: &AvatarTemplate, radius: f64) -> Result<JointTextureMap, EvalError> {
        let joints = template
            .joint_names
            .iter()
            .zip(&template.atlas.joint_anchors)
            .map(|(name, &center)| JointDisc { name: name.clone(), center, radius })
            .collect();
        let map = JointTextureMap { joints };
        map.validate()?;
        let outside =
            map.joints.iter().find(|d| !template.atlas.charts.iter().any(|c| c.contains(d.center[0], d.center[1])));
        if let Some(d) = outside {
            return Err(EvalError::JointMap(format!("joint {} is not inside any chart", d.name)));
        }
        Ok(map)
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        for (i, a) in self.joints.iter().enumerate() {
            if !(a.radius > 0.0) || a.center.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return Err(EvalError::JointMap(format!("joint {} has an invalid disc", a.name)));
            }
            for b in &self.joints[i + 1..] {
                let d = ((a.center[0] - b.center[0]).powi(2) + (a.center[1] - b.center[1]).powi(2)).sqrt();
                if d <= a.radius + b.radius {
                    return Err(EvalError::JointMap(format!("discs of {} and {} overlap", a.name, b.name)));
                }
            }
        }
        Ok(())
    }

    /// Joint index owning each quantized `(u_q, v_q)`, row-major over
    /// `v_q`. Background values map to `None`.
    fn lookup_table(&self) -> Vec<Option<u16>> {
        let mut table = vec![None; 256 * 256];
        for vq in 1..=255u8 {
            let v = dequantize_uv(vq).expect("foreground value");
            for uq in 1..=255u8 {
                let u = dequantize_uv(uq).expect("foreground value");
                table[vq as usize * 256 + uq as usize] = self
                    .joints
                    .iter()
                    .position(|d| (u - d.center[0]).powi(2) + (v - d.center[1]).powi(2) <= d.radius * d.radius)
                    .map(|j| j as u16);
            }
        }
        table
    }
}

/// Centroid per instance and joint of the pixels whose UV falls in the
/// joint's disc. Pixel `(x, y)` has its center at `(x + 0.5, y + 0.5)`.
pub fn extract_joints_2d(
    width: u32,
    height: u32,
    u_q: &[u8],
    v_q: &[u8],
    instance: &[u8],
    map: &JointTextureMap,
) -> Result<Vec<Skeleton2d>, EvalError> {
    let n = width as usize * height as usize;
    if u_q.len() != n || v_q.len() != n || instance.len() != n {
        return Err(EvalError::Dimension(format!("channels do not match {width}x{height}")));
    }
    let table = map.lookup_table();
    let joints = map.joints.len();
    // (count, Σx, Σy) per joint, in integer pixel units
    let mut sums: BTreeMap<u8, Vec<(u64, u64, u64)>> = BTreeMap::new();
    for i in 0..n {
        let id = instance[i];
        if id == 0 || u_q[i] == 0 || v_q[i] == 0 {
            continue;
        }
        let acc = sums.entry(id).or_insert_with(|| vec![(0, 0, 0); joints]);
        if let Some(j) = table[v_q[i] as usize * 256 + u_q[i] as usize] {
            let (x, y) = ((i % width as usize) as u64, (i / width as usize) as u64);
            let s = &mut acc[j as usize];
            *s = (s.0 + 1, s.1 + x, s.2 + y);
        }
    }
    Ok(sums
        .into_iter()
        .map(|(id, acc)| Skeleton2d {
            id,
            joints: acc
                .into_iter()
                .map(|(c, sx, sy)| (c > 0).then(|| [sx as f64 / c as f64 + 0.5, sy as f64 / c as f64 + 0.5]))
                .collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body_model::{build_canonical_avatar, AvatarBuildConfig, SkeletonLayout};
    use crate::raster::quantize_uv;

    #[test]
    fn default_discs_are_disjoint_for_both_layouts() {
        for layout in [SkeletonLayout::Full19, SkeletonLayout::Compact16] {
            let t = build_canonical_avatar(&AvatarBuildConfig { layout, ..Default::default() }).unwrap();
            let map = JointTextureMap::from_template(&t, DEFAULT_DISC_RADIUS).unwrap();
            assert_eq!(map.joints.len(), layout.joint_count());
        }
    }

    #[test]
    fn painted_disc_centroid() {
        let t = build_canonical_avatar(&AvatarBuildConfig::default()).unwrap();
        let map = JointTextureMap::from_template(&t, DEFAULT_DISC_RADIUS).unwrap();
        let (w, h) = (120u32, 100u32);
        let n = (w * h) as usize;
        let (mut u, mut v, mut inst) = (vec![0u8; n], vec![0u8; n], vec![0u8; n]);
        let c = map.joints[6].center;
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                if (x - 50).pow(2) + (y - 60).pow(2) <= 49 {
                    let i = (y * w as i64 + x) as usize;
                    u[i] = quantize_uv(c[0]).unwrap();
                    v[i] = quantize_uv(c[1]).unwrap();
                    inst[i] = 3;
                }
            }
        }
        let sk = extract_joints_2d(w, h, &u, &v, &inst, &map).unwrap();
        assert_eq!(sk.len(), 1);
        assert_eq!(sk[0].id, 3);
        let p = sk[0].joints[6].unwrap();
        assert!((p[0] - 50.0).abs() <= 0.5 && (p[1] - 60.0).abs() <= 0.5);
        assert_eq!(sk[0].joints.iter().filter(|j| j.is_some()).count(), 1);
        let empty = extract_joints_2d(w, h, &vec![0; n], &vec![0; n], &vec![0; n], &map).unwrap();
        assert!(empty.is_empty());
    }
}
