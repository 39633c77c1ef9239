//! Shadow detection and removal.
//!
//! Shadows on snow are dark but keep their chroma, so detection thresholds
//! V from below and S from above. Removal restretches each shadow pixel
//! against the statistics of a "buffer" ring of lit pixels immediately
//! outside the shadow: I' = mu_buff + (I - mu_shadow) / sigma_buff, per
//! channel. The ring is the morphological dilation of the mask minus the
//! mask itself.

use crate::buffer::{quantize_u8, BinaryMask, HsvImage, RgbImage};
use crate::segmentation::{dilate, StructuringElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ShadowParams {
    /// Shadow pixels are darker than this (strict).
    pub v_threshold: u8,
    /// Shadow pixels keep at least this much saturation.
    pub s_threshold: u8,
    /// Width of the lit ring sampled around the shadow, >= 1.
    pub buffer_radius: usize,
}

impl Default for ShadowParams {
    fn default() -> Self {
        Self {
            v_threshold: 60,
            s_threshold: 40,
            buffer_radius: 7,
        }
    }
}

/// bit = (V < v_threshold) AND (S >= s_threshold).
pub fn detect_shadow_mask(img: &HsvImage, p: &ShadowParams) -> BinaryMask {
    let mut out = BinaryMask::new(img.width(), img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (_, s, v) = img.pixel(x, y);
            out.set(x, y, v < p.v_threshold && s >= p.s_threshold);
        }
    }
    out
}

struct ChannelStats {
    shadow_mean: [f64; 3],
    buffer_mean: [f64; 3],
    buffer_std: [f64; 3],
}

fn region_stats(img: &RgbImage, shadow: &BinaryMask, buffer: &BinaryMask) -> Option<ChannelStats> {
    let mut s_sum = [0.0f64; 3];
    let mut s_n = 0usize;
    let mut b_sum = [0.0f64; 3];
    let mut b_n = 0usize;
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (r, g, b) = img.pixel(x, y);
            let px = [r as f64, g as f64, b as f64];
            if shadow.get(x, y) {
                for c in 0..3 {
                    s_sum[c] += px[c];
                }
                s_n += 1;
            } else if buffer.get(x, y) {
                for c in 0..3 {
                    b_sum[c] += px[c];
                }
                b_n += 1;
            }
        }
    }
    if s_n == 0 || b_n == 0 {
        return None;
    }
    let shadow_mean = [
        s_sum[0] / s_n as f64,
        s_sum[1] / s_n as f64,
        s_sum[2] / s_n as f64,
    ];
    let buffer_mean = [
        b_sum[0] / b_n as f64,
        b_sum[1] / b_n as f64,
        b_sum[2] / b_n as f64,
    ];
    let mut var = [0.0f64; 3];
    for y in 0..img.height() {
        for x in 0..img.width() {
            if buffer.get(x, y) {
                let (r, g, b) = img.pixel(x, y);
                let px = [r as f64, g as f64, b as f64];
                for c in 0..3 {
                    let d = px[c] - buffer_mean[c];
                    var[c] += d * d;
                }
            }
        }
    }
    let buffer_std = [
        (var[0] / b_n as f64).sqrt(),
        (var[1] / b_n as f64).sqrt(),
        (var[2] / b_n as f64).sqrt(),
    ];
    Some(ChannelStats {
        shadow_mean,
        buffer_mean,
        buffer_std,
    })
}

/// Remaps shadow pixels; everything else passes through bit-identical.
///
/// Degenerate inputs fall back to the identity: an empty mask silently, an
/// empty buffer or a zero-spread buffer with a logged warning (there is no
/// lit reference to restretch against).
pub fn remove_shadow(img: &RgbImage, shadow: &BinaryMask, p: &ShadowParams) -> RgbImage {
    assert!(
        shadow.width() == img.width() && shadow.height() == img.height(),
        "shadow mask dimensions must match the image"
    );
    if shadow.count_true() == 0 {
        return img.clone();
    }
    let se = StructuringElement::square(p.buffer_radius.max(1));
    let dilated = dilate(shadow, &se);
    let mut buffer = BinaryMask::new(img.width(), img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            buffer.set(x, y, dilated.get(x, y) && !shadow.get(x, y));
        }
    }

    let stats = match region_stats(img, shadow, &buffer) {
        Some(s) => s,
        None => {
            log::warn!("shadow removal skipped: buffer region is empty");
            return img.clone();
        }
    };
    if stats.buffer_std.iter().any(|&s| s == 0.0) {
        log::warn!("shadow removal skipped: buffer has zero spread in some channel");
        return img.clone();
    }

    let mut out = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if !shadow.get(x, y) {
                continue;
            }
            let (r, g, b) = img.pixel(x, y);
            let px = [r as f64, g as f64, b as f64];
            let mut mapped = [0u8; 3];
            for c in 0..3 {
                let v = stats.buffer_mean[c] + (px[c] - stats.shadow_mean[c]) / stats.buffer_std[c];
                mapped[c] = quantize_u8(v);
            }
            out.set_pixel(x, y, (mapped[0], mapped[1], mapped[2]));
        }
    }
    out
}
