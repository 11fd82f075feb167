use std::fs;
use std::path::{Path, PathBuf};

use super::meta::FrameMeta;
use super::DatasetError;
use crate::pnm;
use crate::raster::FrameBuffer;
use crate::scanning::classes::is_human;

pub const RGB_FILE: &str = "rgb.ppm";
pub const BACKGROUND_FILE: &str = "rgb_background.ppm";
pub const COMPOSITE_FILE: &str = "composite.ppm";
pub const DEPTH16_FILE: &str = "depth16.pgm";
pub const DEPTH_Q_FILE: &str = "depth_q.pgm";
pub const U_FILE: &str = "u.pgm";
pub const V_FILE: &str = "v.pgm";
pub const SEMANTIC_FILE: &str = "semantic.pgm";
pub const INSTANCE_FILE: &str = "instance.pgm";
pub const META_FILE: &str = "meta.json";

/// Encoded files of one bundle, in name order.
pub fn encode_bundle(
    frame: &FrameBuffer,
    background: &[u8],
    composite: Option<&[u8]>,
    meta: &FrameMeta,
) -> Vec<(&'static str, Vec<u8>)> {
    let (w, h) = (frame.width, frame.height);
    let mut files = vec![
        (RGB_FILE, pnm::encode_ppm(w, h, &frame.rgb)),
        (BACKGROUND_FILE, pnm::encode_ppm(w, h, background)),
        (DEPTH16_FILE, pnm::encode_pgm16(w, h, &frame.depth_mm())),
        (DEPTH_Q_FILE, pnm::encode_pgm8(w, h, &frame.depth_q)),
        (U_FILE, pnm::encode_pgm8(w, h, &frame.u_q)),
        (V_FILE, pnm::encode_pgm8(w, h, &frame.v_q)),
        (SEMANTIC_FILE, pnm::encode_pgm8(w, h, &frame.semantic)),
        (INSTANCE_FILE, pnm::encode_pgm8(w, h, &frame.instance)),
        (META_FILE, meta.to_json().into_bytes()),
    ];
    if let Some(c) = composite {
        files.push((COMPOSITE_FILE, pnm::encode_ppm(w, h, c)));
    }
    files.sort_by_key(|f| f.0);
    files
}

/// Writes into a sibling staging directory, then renames it into place.
pub fn write_bundle_atomic(dir: &Path, files: &[(&str, Vec<u8>)]) -> Result<(), DatasetError> {
    let name = dir.file_name().and_then(|n| n.to_str()).ok_or_else(|| DatasetError::Bundle {
        path: dir.display().to_string(),
        message: "bundle path has no name".into(),
    })?;
    let staging = dir.with_file_name(format!(".{name}.partial"));
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| DatasetError::Io { path, source }
    };
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(io(&staging))?;
    }
    fs::create_dir_all(&staging).map_err(io(&staging))?;
    for (file, bytes) in files {
        let path = staging.join(file);
        fs::write(&path, bytes).map_err(io(&path))?;
    }
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(io(dir))?;
    }
    fs::rename(&staging, dir).map_err(io(dir))
}

/// A bundle read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub dir: PathBuf,
    pub meta: FrameMeta,
    pub rgb: Vec<u8>,
    pub background: Vec<u8>,
    pub composite: Option<Vec<u8>>,
    pub depth_mm: Vec<u16>,
    pub depth_q: Vec<u8>,
    pub u_q: Vec<u8>,
    pub v_q: Vec<u8>,
    pub semantic: Vec<u8>,
    pub instance: Vec<u8>,
}

impl Bundle {
    pub fn depth_m(&self) -> Vec<f64> {
        self.depth_mm.iter().map(|&d| d as f64 / 1000.0).collect()
    }

    /// Channel consistency after the round trip. Depth is only known to the
    /// millimeter, so the 8-bit depth may sit one bin off at bin edges.
    pub fn check_invariants(&self) -> Result<(), String> {
        let q = &self.meta.depth_quantizer;
        for i in 0..self.instance.len() {
            let human = is_human(self.semantic[i]);
            if (self.instance[i] > 0) != human {
                return Err(format!("pixel {i}: instance {} with class {}", self.instance[i], self.semantic[i]));
            }
            if human && self.depth_mm[i] == 0 {
                return Err(format!("pixel {i}: human pixel without depth"));
            }
            if human != (self.u_q[i] > 0) || human != (self.v_q[i] > 0) {
                return Err(format!("pixel {i}: uv on class {}", self.semantic[i]));
            }
            if self.depth_mm[i] > 0 {
                let d = self.depth_mm[i] as f64 / 1000.0;
                let expected = q.quantize(d).map_err(|e| e.to_string())?;
                if (expected as i32 - self.depth_q[i] as i32).abs() > 1 {
                    return Err(format!("pixel {i}: depth_q {} for {d} m", self.depth_q[i]));
                }
            } else if self.depth_q[i] != 0 {
                return Err(format!("pixel {i}: depth_q without depth"));
            }
        }
        Ok(())
    }
}

fn read_gray8(dir: &Path, name: &str, w: u32, h: u32) -> Result<Vec<u8>, DatasetError> {
    let img = pnm::read(&dir.join(name))?;
    if img.channels != 1 || img.width != w || img.height != h || img.maxval != 255 {
        return Err(DatasetError::Bundle {
            path: dir.join(name).display().to_string(),
            message: "unexpected image format".into(),
        });
    }
    Ok(img.to_bytes().expect("8-bit"))
}

fn read_rgb(dir: &Path, name: &str, w: u32, h: u32) -> Result<Vec<u8>, DatasetError> {
    let img = pnm::read(&dir.join(name))?;
    if img.channels != 3 || img.width != w || img.height != h || img.maxval != 255 {
        return Err(DatasetError::Bundle {
            path: dir.join(name).display().to_string(),
            message: "unexpected image format".into(),
        });
    }
    Ok(img.to_bytes().expect("8-bit"))
}

pub fn read_bundle(dir: &Path) -> Result<Bundle, DatasetError> {
    let meta_path = dir.join(META_FILE);
    let text = fs::read_to_string(&meta_path)
        .map_err(|source| DatasetError::Io { path: meta_path.display().to_string(), source })?;
    let meta = FrameMeta::from_json(&text)
        .map_err(|message| DatasetError::Bundle { path: meta_path.display().to_string(), message })?;
    let (w, h) = (meta.width, meta.height);
    let depth = pnm::read(&dir.join(DEPTH16_FILE))?;
    if depth.channels != 1 || depth.width != w || depth.height != h || depth.maxval != 65535 {
        return Err(DatasetError::Bundle {
            path: dir.join(DEPTH16_FILE).display().to_string(),
            message: "unexpected image format".into(),
        });
    }
    let composite = if dir.join(COMPOSITE_FILE).exists() { Some(read_rgb(dir, COMPOSITE_FILE, w, h)?) } else { None };
    Ok(Bundle {
        dir: dir.to_path_buf(),
        rgb: read_rgb(dir, RGB_FILE, w, h)?,
        background: read_rgb(dir, BACKGROUND_FILE, w, h)?,
        composite,
        depth_mm: depth.samples,
        depth_q: read_gray8(dir, DEPTH_Q_FILE, w, h)?,
        u_q: read_gray8(dir, U_FILE, w, h)?,
        v_q: read_gray8(dir, V_FILE, w, h)?,
        semantic: read_gray8(dir, SEMANTIC_FILE, w, h)?,
        instance: read_gray8(dir, INSTANCE_FILE, w, h)?,
        meta,
    })
}

/// Bundle directories below `root` (those holding a `meta.json`), sorted by
/// name.
pub fn list_bundles(root: &Path) -> Result<Vec<PathBuf>, DatasetError> {
    let frames = if root.join("frames").is_dir() { root.join("frames") } else { root.to_path_buf() };
    let entries =
        fs::read_dir(&frames).map_err(|source| DatasetError::Io { path: frames.display().to_string(), source })?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')) && p.join(META_FILE).is_file())
        .collect();
    dirs.sort();
    Ok(dirs)
}
