use serde::{Deserialize, Serialize};

use super::RasterError;

/// Uniform depth quantizer; depths outside `[near, far)` clamp to the end
/// bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthQuantizer {
    pub near: f64,
    pub far: f64,
    pub bins: u32,
}

impl Default for DepthQuantizer {
    fn default() -> Self {
        DepthQuantizer { near: 1.0, far: 5.5, bins: 256 }
    }
}

impl DepthQuantizer {
    pub fn new(near: f64, far: f64, bins: u32) -> Result<Self, RasterError> {
        let q = DepthQuantizer { near, far, bins };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<(), RasterError> {
        if !(self.near.is_finite() && self.far.is_finite() && self.near < self.far) {
            return Err(RasterError::Argument(format!("depth range [{}, {}] is empty", self.near, self.far)));
        }
        if !(2..=256).contains(&self.bins) {
            return Err(RasterError::Argument(format!("{} depth bins; 2..=256 supported", self.bins)));
        }
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        (self.far - self.near) / self.bins as f64
    }

    pub fn quantize(&self, depth: f64) -> Result<u8, RasterError> {
        if !(depth > 0.0) || !depth.is_finite() {
            return Err(RasterError::Argument(format!("depth {depth} must be positive and finite")));
        }
        let bin = ((depth - self.near) / (self.far - self.near) * self.bins as f64).floor();
        Ok(bin.clamp(0.0, (self.bins - 1) as f64) as u8)
    }

    /// Center of `bin` in meters.
    pub fn bin_center(&self, bin: u8) -> f64 {
        self.near + (bin as f64 + 0.5) * self.bin_width()
    }
}

pub fn quantize_depth(quantizer: &DepthQuantizer, depth: f64) -> Result<u8, RasterError> {
    quantizer.quantize(depth)
}

/// Maps `u ∈ [0, 1]` onto `1..=255`; 0 stays reserved for background.
pub fn quantize_uv(u: f64) -> Result<u8, RasterError> {
    if !(0.0..=1.0).contains(&u) {
        return Err(RasterError::Argument(format!("texture coordinate {u} outside [0, 1]")));
    }
    Ok(1 + (u * 255.0).floor().min(254.0) as u8)
}

/// Bin center of a quantized texture coordinate; `None` for background.
pub fn dequantize_uv(q: u8) -> Option<f64> {
    (q > 0).then(|| (q as f64 - 0.5) / 255.0)
}
