//! Binary PGM (P5) and PPM (P6) codec.
//!
//! Headers are written as `P5\n<w> <h>\n<maxval>\n`. Samples wider than
//! 8 bits are big-endian. The reader accepts any conforming header,
//! including comments.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PnmError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("malformed netpbm data: {0}")]
    Format(String),
}

/// A decoded image. `samples` holds `width·height·channels` values in row
/// order regardless of bit depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pnm {
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

impl Pnm {
    /// 8-bit samples, or `None` for 16-bit images.
    pub fn to_bytes(&self) -> Option<Vec<u8>> {
        (self.maxval <= 255).then(|| self.samples.iter().map(|&s| s as u8).collect())
    }
}

fn header(magic: &str, width: u32, height: u32, maxval: u16) -> Vec<u8> {
    format!("{magic}\n{width} {height}\n{maxval}\n").into_bytes()
}

fn check_len(width: u32, height: u32, channels: usize, len: usize) {
    assert_eq!(
        len,
        width as usize * height as usize * channels,
        "sample count does not match {width}x{height}x{channels}"
    );
}

pub fn encode_pgm8(width: u32, height: u32, data: &[u8]) -> Vec<u8> {
    check_len(width, height, 1, data.len());
    let mut out = header("P5", width, height, 255);
    out.extend_from_slice(data);
    out
}

pub fn encode_pgm16(width: u32, height: u32, data: &[u16]) -> Vec<u8> {
    check_len(width, height, 1, data.len());
    let mut out = header("P5", width, height, 65535);
    out.reserve(2 * data.len());
    for s in data {
        out.extend_from_slice(&s.to_be_bytes());
    }
    out
}

pub fn encode_ppm(width: u32, height: u32, rgb: &[u8]) -> Vec<u8> {
    check_len(width, height, 3, rgb.len());
    let mut out = header("P6", width, height, 255);
    out.extend_from_slice(rgb);
    out
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b' ' | b'\t' | b'\n' | b'\r' | b'\x0b' | b'\x0c' => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, PnmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.data[start..self.pos]).expect("ascii digits");
        text.parse().map_err(|_| PnmError::Format(format!("expected {what} at byte {start}")))
    }
}

pub fn decode(data: &[u8]) -> Result<Pnm, PnmError> {
    let channels = match data.get(..2) {
        Some(b"P5") => 1u8,
        Some(b"P6") => 3u8,
        _ => return Err(PnmError::Format("expected P5 or P6 magic".into())),
    };
    let mut c = Cursor { data, pos: 2 };
    let width = c.number("width")?;
    let height = c.number("height")?;
    let maxval = c.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PnmError::Format(format!("empty image {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(PnmError::Format(format!("maxval {maxval} outside 1..=65535")));
    }
    // exactly one whitespace byte separates the header from the raster
    match data.get(c.pos) {
        Some(b) if b.is_ascii_whitespace() => c.pos += 1,
        _ => return Err(PnmError::Format("missing whitespace after maxval".into())),
    }
    let count = width as usize * height as usize * channels as usize;
    let wide = maxval > 255;
    let body = &data[c.pos..];
    let needed = if wide { 2 * count } else { count };
    if body.len() < needed {
        return Err(PnmError::Format(format!("raster truncated: {} of {needed} bytes", body.len())));
    }
    let samples: Vec<u16> = if wide {
        body[..needed].chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]])).collect()
    } else {
        body[..needed].iter().map(|&b| u16::from(b)).collect()
    };
    if let Some(s) = samples.iter().find(|&&s| u32::from(s) > maxval) {
        return Err(PnmError::Format(format!("sample {s} exceeds maxval {maxval}")));
    }
    Ok(Pnm { width, height, channels, maxval: maxval as u16, samples })
}

pub fn read(path: &Path) -> Result<Pnm, PnmError> {
    let data = fs::read(path).map_err(|source| PnmError::Io { path: path.display().to_string(), source })?;
    decode(&data)
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<(), PnmError> {
    fs::write(path, bytes).map_err(|source| PnmError::Io { path: path.display().to_string(), source })
}
