//! Dense 8-bit raster buffers.
//!
//! All buffers are row-major. The sample index of `(x, y, channel)` is
//! `(y * width + x) * channels + channel`. Buffers are plain values:
//! every operation in this crate takes them by reference and returns a
//! new buffer, so they can be shared freely across threads.

use crate::error::{Error, Result};

/// Rounds half-up: 0.5 goes to 1, -0.5 goes to 0.
pub(crate) fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// Rounds half-up and clamps into the 8-bit sample range.
pub(crate) fn quantize_u8(x: f64) -> u8 {
    round_half_up(x).clamp(0, 255) as u8
}

/// Rec. 601 luma of one pixel.
pub(crate) fn luma_u8(r: u8, g: u8, b: u8) -> u8 {
    quantize_u8(0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64)
}

/// Interleaved R,G,B image, 8 bits per sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    /// All-black image.
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height * 3],
        }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::InvalidParameter(format!(
                "rgb buffer length {} != {}x{}x3",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> (u8, u8, u8) {
        let i = (y * self.width + x) * 3;
        (self.data[i], self.data[i + 1], self.data[i + 2])
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: (u8, u8, u8)) {
        let i = (y * self.width + x) * 3;
        self.data[i] = rgb.0;
        self.data[i + 1] = rgb.1;
        self.data[i + 2] = rgb.2;
    }

    /// Rec. 601 luma: round(0.299 R + 0.587 G + 0.114 B).
    pub fn to_gray(&self) -> GrayImage {
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| luma_u8(p[0], p[1], p[2]))
            .collect();
        GrayImage {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// Single-channel image, 8 bits per sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "gray buffer length {} != {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }
}

/// Interleaved H,S,V image. H uses half-degree units and stays in 0..=179;
/// S and V use the full byte range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HsvImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl HsvImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height * 3],
        }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::InvalidParameter(format!(
                "hsv buffer length {} != {}x{}x3",
                data.len(),
                width,
                height
            )));
        }
        if let Some(h) = data.iter().step_by(3).find(|&&h| h > 179) {
            return Err(Error::InvalidParameter(format!("hue {h} out of 0..=179")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Raw interleaved samples; callers must keep hue in 0..=179.
    pub(crate) fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> (u8, u8, u8) {
        let i = (y * self.width + x) * 3;
        (self.data[i], self.data[i + 1], self.data[i + 2])
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, hsv: (u8, u8, u8)) {
        debug_assert!(hsv.0 <= 179);
        let i = (y * self.width + x) * 3;
        self.data[i] = hsv.0;
        self.data[i + 1] = hsv.1;
        self.data[i + 2] = hsv.2;
    }
}

/// Per-pixel boolean raster (snow / road / ground-truth roles).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Self {
            width,
            height,
            bits: vec![value; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "mask length {} != {}x{}",
                bits.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count_true(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn same_dimensions(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Thresholds a grayscale image: bit = (sample >= threshold).
pub fn mask_from_gray(g: &GrayImage, threshold: u8) -> BinaryMask {
    BinaryMask {
        width: g.width,
        height: g.height,
        bits: g.data.iter().map(|&v| v >= threshold).collect(),
    }
}
