use serde::{Deserialize, Serialize};

use super::DepthQuantizer;
use crate::scanning::classes::{is_human, BACKGROUND};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderReport {
    pub triangles: usize,
    /// Zero-area triangles, skipped.
    pub degenerate: usize,
    /// Triangles entirely behind the near plane.
    pub clipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointRecord {
    /// World position (m).
    pub position: [f64; 3],
    /// Continuous pixel coordinates; `None` behind the camera.
    pub pixel: Option<[f64; 2]>,
    /// Camera-frame depth (m).
    pub depth: Option<f64>,
    pub visible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvatarJoints {
    pub instance_id: u8,
    pub joints: Vec<JointRecord>,
}

/// Every annotation channel of one rendered view, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBuffer {
    pub width: u32,
    pub height: u32,
    pub rgb: Vec<u8>,
    /// Camera-frame depth in meters, 0 where nothing was drawn.
    pub depth_m: Vec<f64>,
    pub depth_q: Vec<u8>,
    pub u_q: Vec<u8>,
    pub v_q: Vec<u8>,
    pub semantic: Vec<u8>,
    pub instance: Vec<u8>,
    pub avatars: Vec<AvatarJoints>,
    pub report: RenderReport,
}

impl FrameBuffer {
    pub fn empty(width: u32, height: u32) -> FrameBuffer {
        let n = width as usize * height as usize;
        FrameBuffer {
            width,
            height,
            rgb: vec![0; 3 * n],
            depth_m: vec![0.0; n],
            depth_q: vec![0; n],
            u_q: vec![0; n],
            v_q: vec![0; n],
            semantic: vec![BACKGROUND; n],
            instance: vec![0; n],
            avatars: Vec::new(),
            report: RenderReport::default(),
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    /// Depth in millimeters, saturating at `u16::MAX`; 0 where empty.
    pub fn depth_mm(&self) -> Vec<u16> {
        self.depth_m.iter().map(|&d| (d * 1000.0).round().clamp(0.0, u16::MAX as f64) as u16).collect()
    }

    /// Checks the channel-consistency rules; returns the first violation.
    pub fn check_invariants(&self, quantizer: &DepthQuantizer) -> Result<(), String> {
        let n = self.pixel_count();
        let lens = [
            self.depth_m.len(),
            self.depth_q.len(),
            self.u_q.len(),
            self.v_q.len(),
            self.semantic.len(),
            self.instance.len(),
        ];
        if lens.iter().any(|&l| l != n) || self.rgb.len() != 3 * n {
            return Err(format!("channel lengths {lens:?} / rgb {} for {n} pixels", self.rgb.len()));
        }
        for i in 0..n {
            let human = is_human(self.semantic[i]);
            let fg = self.instance[i] > 0;
            let d = self.depth_m[i];
            if fg != human {
                return Err(format!("pixel {i}: instance {} with class {}", self.instance[i], self.semantic[i]));
            }
            if human && !(d > 0.0) {
                return Err(format!("pixel {i}: human pixel without depth"));
            }
            if d > 0.0 {
                let q = quantizer.quantize(d).map_err(|e| e.to_string())?;
                if q != self.depth_q[i] {
                    return Err(format!("pixel {i}: depth_q {} but depth {d} quantizes to {q}", self.depth_q[i]));
                }
            } else if d != 0.0 || self.depth_q[i] != 0 {
                return Err(format!("pixel {i}: empty pixel carries depth"));
            }
            if human != (self.u_q[i] > 0) || human != (self.v_q[i] > 0) {
                return Err(format!("pixel {i}: uv ({}, {}) on class {}", self.u_q[i], self.v_q[i], self.semantic[i]));
            }
        }
        Ok(())
    }
}
