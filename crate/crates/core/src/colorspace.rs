//! RGB to HSV conversion in half-degree hue units.
//!
//! Value is the channel maximum, chroma the max-min spread, saturation the
//! chroma scaled by 255/V, and hue a piecewise-linear function of the two
//! non-maximal channels with a period of 180. Conventions pinned for
//! bit-exact reproducibility:
//!
//! - branch priority when channels tie for the maximum: R, then G, then B;
//! - negative hue is wrapped by +180 before rounding;
//! - hue and saturation round half-up; a rounded hue of 180 folds to 0
//!   (same point on the hue circle);
//! - zero chroma yields hue 0, zero value yields saturation 0.

use crate::buffer::{round_half_up, HsvImage, RgbImage};

/// One converted pixel: h in 0..=179, s and v in 0..=255.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HsvPixel {
    pub h: u8,
    pub s: u8,
    pub v: u8,
}

pub fn rgb_to_hsv_pixel(r: u8, g: u8, b: u8) -> HsvPixel {
    let v = r.max(g).max(b);
    let c = v - r.min(g).min(b);

    let s = if v == 0 {
        0
    } else {
        round_half_up(255.0 * c as f64 / v as f64) as u8
    };

    let h = if c == 0 {
        0
    } else {
        let (rf, gf, bf, cf) = (r as f64, g as f64, b as f64, c as f64);
        let mut hue = if v == r {
            30.0 * (gf - bf) / cf
        } else if v == g {
            60.0 + 30.0 * (bf - rf) / cf
        } else {
            120.0 + 30.0 * (rf - gf) / cf
        };
        if hue < 0.0 {
            hue += 180.0;
        }
        let rounded = round_half_up(hue);
        if rounded == 180 {
            0
        } else {
            rounded as u8
        }
    };

    HsvPixel { h, s, v }
}

/// Per-pixel conversion of a whole image; dimensions preserved.
pub fn rgb_to_hsv(img: &RgbImage) -> HsvImage {
    let mut out = HsvImage::new(img.width(), img.height());
    let src = img.data();
    let dst = out.data_mut();
    for (d, p) in dst.chunks_exact_mut(3).zip(src.chunks_exact(3)) {
        let hsv = rgb_to_hsv_pixel(p[0], p[1], p[2]);
        d[0] = hsv.h;
        d[1] = hsv.s;
        d[2] = hsv.v;
    }
    out
}
