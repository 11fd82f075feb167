//! Background substitution with shadow transfer through a ratio image.

use std::path::Path;

use rand::Rng;
use thiserror::Error;

use crate::pnm::{self, PnmError};
use crate::raster::FrameBuffer;
use crate::seed::SeedStream;

/// Upper clamp of the shading ratio.
pub const MAX_RATIO: f64 = 4.0;

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("background plate {path}: {message}")]
    Plate { path: String, message: String },
    #[error(transparent)]
    Pnm(#[from] PnmError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackgroundPlate {
    pub camera_id: String,
    pub width: u32,
    pub height: u32,
    pub rgb: Vec<u8>,
}

impl BackgroundPlate {
    pub fn new(
        camera_id: impl Into<String>,
        width: u32,
        height: u32,
        rgb: Vec<u8>,
    ) -> Result<BackgroundPlate, ComposeError> {
        if rgb.len() != 3 * width as usize * height as usize {
            return Err(ComposeError::Dimension(format!("{} bytes for a {width}x{height} plate", rgb.len())));
        }
        Ok(BackgroundPlate { camera_id: camera_id.into(), width, height, rgb })
    }

    /// Reads a binary PPM, or a PNG when the extension says so.
    pub fn load(camera_id: impl Into<String>, path: &Path) -> Result<BackgroundPlate, ComposeError> {
        let fail = |message: String| ComposeError::Plate { path: path.display().to_string(), message };
        let is_png = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"));
        let (width, height, rgb) = if is_png {
            let img = image::open(path).map_err(|e| fail(e.to_string()))?.to_rgb8();
            (img.width(), img.height(), img.into_raw())
        } else {
            let img = pnm::read(path)?;
            if img.channels != 3 {
                return Err(fail("expected a color (P6) image".into()));
            }
            let rgb = img.to_bytes().ok_or_else(|| fail("16-bit plates are not supported".into()))?;
            (img.width, img.height, rgb)
        };
        BackgroundPlate::new(camera_id, width, height, rgb)
    }

    /// Stand-in for a photographed room: a vertical gradient with a little
    /// texture noise.
    pub fn procedural(camera_id: impl Into<String>, width: u32, height: u32, seed: SeedStream) -> BackgroundPlate {
        let mut rng = seed.rng();
        let top = [rng.random_range(90..160u8), rng.random_range(90..160u8), rng.random_range(90..160u8)];
        let bottom = [rng.random_range(40..110u8), rng.random_range(40..110u8), rng.random_range(40..110u8)];
        let mut rgb = Vec::with_capacity(3 * width as usize * height as usize);
        for y in 0..height {
            let t = y as f64 / height.max(2).saturating_sub(1) as f64;
            for _ in 0..width {
                let grain: f64 = rng.random_range(-6.0..6.0);
                for c in 0..3 {
                    let base = top[c] as f64 * (1.0 - t) + bottom[c] as f64 * t;
                    rgb.push((base + grain).round().clamp(0.0, 255.0) as u8);
                }
            }
        }
        BackgroundPlate { camera_id: camera_id.into(), width, height, rgb }
    }
}

/// Per-pixel shading ratio between the full render and the render without
/// avatars: the channel mean of `full / background` on background pixels,
/// clamped to `[0, MAX_RATIO]`; 1 on foreground pixels and for empty
/// background channels.
pub fn ratio_image(full: &FrameBuffer, background_only: &[u8]) -> Result<Vec<f64>, ComposeError> {
    let n = full.pixel_count();
    if background_only.len() != 3 * n || full.rgb.len() != 3 * n {
        return Err(ComposeError::Dimension(format!("{} background bytes for {n} pixels", background_only.len())));
    }
    Ok((0..n)
        .map(|i| {
            if full.instance[i] > 0 {
                return 1.0;
            }
            let sum: f64 = (0..3)
                .map(|c| {
                    let (f, b) = (full.rgb[3 * i + c] as f64, background_only[3 * i + c] as f64);
                    if b == 0.0 {
                        1.0
                    } else {
                        f / b
                    }
                })
                .sum();
            (sum / 3.0).clamp(0.0, MAX_RATIO)
        })
        .collect())
}

/// Foreground copied from the render; background is the plate scaled by
/// the ratio. Background pixels touching the foreground (8-neighborhood)
/// are blended half way toward the mean of their foreground neighbors.
pub fn composite(plate: &BackgroundPlate, frame: &FrameBuffer, ratios: &[f64]) -> Result<Vec<u8>, ComposeError> {
    let (w, h) = (frame.width as usize, frame.height as usize);
    let n = w * h;
    if plate.width != frame.width || plate.height != frame.height || ratios.len() != n {
        return Err(ComposeError::Dimension(format!(
            "plate {}x{}, frame {}x{}, {} ratios",
            plate.width,
            plate.height,
            frame.width,
            frame.height,
            ratios.len()
        )));
    }
    let mut out = vec![0u8; 3 * n];
    for i in 0..n {
        for c in 0..3 {
            out[3 * i + c] = if frame.instance[i] > 0 {
                frame.rgb[3 * i + c]
            } else {
                (plate.rgb[3 * i + c] as f64 * ratios[i]).round().clamp(0.0, 255.0) as u8
            };
        }
    }
    let base = out.clone();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if frame.instance[i] > 0 {
                continue;
            }
            let mut acc = [0u32; 3];
            let mut count = 0u32;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if frame.instance[j] > 0 {
                        for c in 0..3 {
                            acc[c] += u32::from(frame.rgb[3 * j + c]);
                        }
                        count += 1;
                    }
                }
            }
            if count > 0 {
                for c in 0..3 {
                    let fg = acc[c] as f64 / count as f64;
                    out[3 * i + c] = (0.5 * base[3 * i + c] as f64 + 0.5 * fg).round().clamp(0.0, 255.0) as u8;
                }
            }
        }
    }
    Ok(out)
}

/// Background pixels within one pixel of the foreground.
pub fn feather_band(frame: &FrameBuffer) -> Vec<bool> {
    let (w, h) = (frame.width as usize, frame.height as usize);
    let mut band = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            if frame.instance[y * w + x] > 0 {
                continue;
            }
            band[y * w + x] = (y.saturating_sub(1)..(y + 2).min(h))
                .any(|ny| (x.saturating_sub(1)..(x + 2).min(w)).any(|nx| frame.instance[ny * w + nx] > 0));
        }
    }
    band
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(w: u32, h: u32) -> FrameBuffer {
        FrameBuffer::empty(w, h)
    }

    #[test]
    fn half_intensity_shadow_halves_the_plate() {
        let mut full = frame(1, 1);
        full.rgb = vec![50, 60, 70];
        let r = ratio_image(&full, &[100, 120, 140]).unwrap();
        assert!((r[0] - 0.5).abs() < 1e-12);
        let plate = BackgroundPlate::new("c", 1, 1, vec![100, 100, 100]).unwrap();
        assert_eq!(composite(&plate, &full, &r).unwrap(), vec![50, 50, 50]);
    }

    #[test]
    fn guards_and_clamps() {
        let mut full = frame(2, 1);
        full.rgb = vec![200, 0, 255, 9, 9, 9];
        let r = ratio_image(&full, &[0, 0, 1, 0, 0, 0]).unwrap();
        assert_eq!(r[0], MAX_RATIO);
        assert_eq!(r[1], 1.0);
        let plate = BackgroundPlate::new("c", 2, 1, vec![255; 6]).unwrap();
        assert_eq!(composite(&plate, &full, &[4.0, 4.0]).unwrap(), vec![255; 6]);
    }

    #[test]
    fn foreground_is_copied_and_its_border_feathered() {
        let mut f = frame(3, 1);
        f.instance[1] = 1;
        f.semantic[1] = 1;
        f.rgb[3..6].copy_from_slice(&[200, 100, 0]);
        let plate = BackgroundPlate::new("c", 3, 1, vec![0; 9]).unwrap();
        let out = composite(&plate, &f, &[1.0; 3]).unwrap();
        assert_eq!(&out[3..6], &[200, 100, 0]);
        assert_eq!(&out[0..3], &[100, 50, 0]);
        assert_eq!(feather_band(&f), vec![true, false, true]);
    }

    #[test]
    fn dimension_errors() {
        let f = frame(2, 2);
        assert!(ratio_image(&f, &[0; 3]).is_err());
        let plate = BackgroundPlate::new("c", 1, 1, vec![0; 3]).unwrap();
        assert!(composite(&plate, &f, &[1.0; 4]).is_err());
        assert!(BackgroundPlate::new("c", 2, 2, vec![0; 3]).is_err());
    }
}
