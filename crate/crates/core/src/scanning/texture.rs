use std::path::Path;

use serde::{Deserialize, Serialize};

use super::classes::{is_human, ClassId, ClassSet, BOTTOM, FACE, HAIR, SHOES, SKIN, TOP, UNLABELED};
use super::ScanError;
use crate::body_model::{AvatarTemplate, BodyRegion, Chart};
use crate::pnm;

/// Texels per side; one per quantized UV value.
pub const TEXTURE_SIZE: usize = 255;

/// Class id per texel. Texel `(x, y)` covers quantized coordinates
/// `u_q = x + 1`, `v_q = y + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTexture {
    labels: Vec<ClassId>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    width: usize,
    height: usize,
    class_set: ClassSet,
}

impl Default for LabelTexture {
    fn default() -> Self {
        LabelTexture::unlabeled()
    }
}

impl LabelTexture {
    pub fn unlabeled() -> LabelTexture {
        LabelTexture { labels: vec![UNLABELED; TEXTURE_SIZE * TEXTURE_SIZE] }
    }

    pub fn from_labels(labels: Vec<ClassId>) -> Result<LabelTexture, ScanError> {
        if labels.len() != TEXTURE_SIZE * TEXTURE_SIZE {
            return Err(ScanError::Dimension(format!(
                "{} texels, expected {}",
                labels.len(),
                TEXTURE_SIZE * TEXTURE_SIZE
            )));
        }
        if let Some(bad) = labels.iter().find(|&&c| c != UNLABELED && !is_human(c)) {
            return Err(ScanError::Texture(format!("texel class {bad} is not a human class")));
        }
        Ok(LabelTexture { labels })
    }

    pub fn labels(&self) -> &[ClassId] {
        &self.labels
    }

    pub fn texel(&self, x: usize, y: usize) -> ClassId {
        self.labels[y * TEXTURE_SIZE + x]
    }

    /// Nearest-texel lookup by quantized coordinates; 0 maps to unlabeled.
    pub fn get(&self, u_q: u8, v_q: u8) -> ClassId {
        if u_q == 0 || v_q == 0 {
            return UNLABELED;
        }
        self.texel(u_q as usize - 1, v_q as usize - 1)
    }

    pub fn labeled_count(&self) -> usize {
        self.labels.iter().filter(|&&c| c != UNLABELED).count()
    }

    /// Outfit labels derived from the atlas: hair and face on the head,
    /// a top over torso and upper arms, bottoms over the legs, shoes, and
    /// skin elsewhere.
    pub fn ground_truth(template: &AvatarTemplate) -> LabelTexture {
        let texel = 1.0 / TEXTURE_SIZE as f64;
        let charts = &template.atlas.charts;
        let mut labels = vec![UNLABELED; TEXTURE_SIZE * TEXTURE_SIZE];
        for y in 0..TEXTURE_SIZE {
            let v = (y as f64 + 0.5) * texel;
            for x in 0..TEXTURE_SIZE {
                let u = (x as f64 + 0.5) * texel;
                // texels straddling a chart border belong to it as well
                let chart = charts
                    .iter()
                    .find(|c| c.contains(u, v))
                    .or_else(|| charts.iter().find(|c| expanded(c, texel, u, v)));
                if let Some(c) = chart {
                    labels[y * TEXTURE_SIZE + x] = outfit_class(c, u, v);
                }
            }
        }
        LabelTexture { labels }
    }

    /// 8-bit PGM of class ids plus a JSON sidecar naming the class set.
    pub fn save(&self, pgm: &Path) -> Result<(), ScanError> {
        pnm::write(pgm, &pnm::encode_pgm8(TEXTURE_SIZE as u32, TEXTURE_SIZE as u32, &self.labels))?;
        let sidecar = Sidecar { width: TEXTURE_SIZE, height: TEXTURE_SIZE, class_set: ClassSet::standard() };
        let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        let path = sidecar_path(pgm);
        std::fs::write(&path, text).map_err(|e| ScanError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(pgm: &Path) -> Result<LabelTexture, ScanError> {
        let path = sidecar_path(pgm);
        let text = std::fs::read_to_string(&path).map_err(|e| ScanError::Io(format!("{}: {e}", path.display())))?;
        let sidecar: Sidecar =
            serde_json::from_str(&text).map_err(|e| ScanError::Texture(format!("{}: {e}", path.display())))?;
        if sidecar.class_set != ClassSet::standard() {
            return Err(ScanError::Texture(format!("{}: unsupported class set", path.display())));
        }
        let img = pnm::read(pgm)?;
        if img.channels != 1 || img.width as usize != sidecar.width || img.height as usize != sidecar.height {
            return Err(ScanError::Dimension(format!("{}: {}x{} image", pgm.display(), img.width, img.height)));
        }
        let bytes = img.to_bytes().ok_or_else(|| ScanError::Texture("label texture must be 8-bit".into()))?;
        LabelTexture::from_labels(bytes)
    }
}

pub fn sidecar_path(pgm: &Path) -> std::path::PathBuf {
    pgm.with_extension("json")
}

fn expanded(c: &Chart, pad: f64, u: f64, v: f64) -> bool {
    u >= c.rect[0] - pad && u <= c.rect[2] + pad && v >= c.rect[1] - pad && v <= c.rect[3] + pad
}

fn outfit_class(chart: &Chart, u: f64, v: f64) -> ClassId {
    match chart.region {
        BodyRegion::Head => {
            let s = chart.surface;
            let around = ((u - s[0]) / (s[2] - s[0])).clamp(0.0, 1.0);
            let along = (v - s[1]) / (s[3] - s[1]);
            // u starts at the front of the part, v at its lower pole
            let front = !(0.25..=0.75).contains(&around);
            if front && along < 0.65 {
                FACE
            } else {
                HAIR
            }
        }
        BodyRegion::Torso | BodyRegion::UpperArm => TOP,
        BodyRegion::Thigh | BodyRegion::Shin => BOTTOM,
        BodyRegion::Foot => SHOES,
        BodyRegion::Neck | BodyRegion::Forearm | BodyRegion::Wrist | BodyRegion::Hand => SKIN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body_model::{build_canonical_avatar, AvatarBuildConfig};

    #[test]
    fn ground_truth_covers_every_class() {
        let t = build_canonical_avatar(&AvatarBuildConfig::default()).unwrap();
        let gt = LabelTexture::ground_truth(&t);
        for c in [SKIN, FACE, HAIR, TOP, BOTTOM, SHOES] {
            assert!(gt.labels().contains(&c), "class {c} missing");
        }
        assert!(gt.labels().contains(&UNLABELED));
        // every face corner lands on a labeled texel
        let q = |x: f64| 1 + (x * 255.0).floor().min(254.0) as u8;
        for uv in &t.uv_coords {
            for c in uv {
                assert_ne!(gt.get(q(c[0]), q(c[1])), UNLABELED);
            }
        }
    }

    #[test]
    fn save_load_round_trip() {
        let t = build_canonical_avatar(&AvatarBuildConfig::default()).unwrap();
        let gt = LabelTexture::ground_truth(&t);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.pgm");
        gt.save(&path).unwrap();
        assert_eq!(LabelTexture::load(&path).unwrap(), gt);
    }

    #[test]
    fn rejects_environment_classes() {
        let mut labels = vec![UNLABELED; TEXTURE_SIZE * TEXTURE_SIZE];
        labels[3] = 7;
        assert!(LabelTexture::from_labels(labels).is_err());
        assert!(LabelTexture::from_labels(vec![SKIN; 10]).is_err());
    }
}
