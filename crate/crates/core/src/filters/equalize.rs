//! Histogram equalization of the V plane.

use crate::buffer::{quantize_u8, HsvImage};

/// Equalizes brightness only; H and S pass through untouched.
///
/// v' = round(255 * (cdf(v) - cdf_min) / (N - cdf_min)) where cdf_min is
/// the cdf at the darkest occupied bin. An image whose V plane is constant
/// maps to itself (the degenerate denominator is treated as identity).
pub fn equalize_value_channel(img: &HsvImage) -> HsvImage {
    let (w, h) = (img.width(), img.height());
    let n = w * h;
    let mut hist = [0u64; 256];
    for y in 0..h {
        for x in 0..w {
            hist[img.pixel(x, y).2 as usize] += 1;
        }
    }
    let mut cdf = [0u64; 256];
    let mut acc = 0u64;
    for (i, &c) in hist.iter().enumerate() {
        acc += c;
        cdf[i] = acc;
    }
    let cdf_min = *cdf.iter().find(|&&c| c > 0).unwrap_or(&0);

    let mut lut = [0u8; 256];
    if n as u64 == cdf_min {
        // Single occupied bin: nothing to spread, keep V as-is.
        for (i, slot) in lut.iter_mut().enumerate() {
            *slot = i as u8;
        }
    } else {
        let denom = (n as u64 - cdf_min) as f64;
        for i in 0..256 {
            if hist[i] == 0 {
                continue; // never looked up
            }
            lut[i] = quantize_u8(255.0 * (cdf[i] - cdf_min) as f64 / denom);
        }
    }

    let mut out = HsvImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let (hh, s, v) = img.pixel(x, y);
            out.set_pixel(x, y, (hh, s, lut[v as usize]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hsv_from_v(w: usize, h: usize, vs: &[u8]) -> HsvImage {
        let mut img = HsvImage::new(w, h);
        for y in 0..h {
            for x in 0..w {
                img.set_pixel(x, y, (42, 17, vs[y * w + x]));
            }
        }
        img
    }

    #[test]
    fn constant_image_is_fixed_point() {
        let img = hsv_from_v(4, 3, &[200; 12]);
        assert_eq!(equalize_value_channel(&img), img);
    }

    #[test]
    fn hue_and_saturation_untouched() {
        let mut img = HsvImage::new(3, 1);
        img.set_pixel(0, 0, (10, 250, 5));
        img.set_pixel(1, 0, (90, 3, 128));
        img.set_pixel(2, 0, (179, 77, 255));
        let e = equalize_value_channel(&img);
        for x in 0..3 {
            let (h0, s0, _) = img.pixel(x, 0);
            let (h1, s1, _) = e.pixel(x, 0);
            assert_eq!((h0, s0), (h1, s1));
        }
    }

    #[test]
    fn two_level_image_spreads_to_full_range() {
        // Half the pixels at 100, half at 101:
        // cdf(100) = N/2 = cdf_min -> maps to 0; cdf(101) = N -> 255.
        let mut vs = vec![100u8; 8];
        vs.extend_from_slice(&[101; 8]);
        let img = hsv_from_v(4, 4, &vs);
        let e = equalize_value_channel(&img);
        assert_eq!(e.pixel(0, 0).2, 0);
        assert_eq!(e.pixel(3, 3).2, 255);
    }

    #[test]
    fn golden_four_level_ramp() {
        // 2x2 with V = [10, 20, 30, 40]; cdf = 1,2,3,4; cdf_min = 1.
        // v' = round(255 * (cdf-1) / 3) = 0, 85, 170, 255.
        let img = hsv_from_v(2, 2, &[10, 20, 30, 40]);
        let e = equalize_value_channel(&img);
        assert_eq!(e.pixel(0, 0).2, 0);
        assert_eq!(e.pixel(1, 0).2, 85);
        assert_eq!(e.pixel(0, 1).2, 170);
        assert_eq!(e.pixel(1, 1).2, 255);
    }

    #[test]
    fn uniform_ramp_maps_to_itself() {
        // 256 pixels covering every level once: cdf(v) = v+1, cdf_min = 1,
        // map(v) = round(255v/255) = v.
        let vs: Vec<u8> = (0..=255).collect();
        let img = hsv_from_v(16, 16, &vs);
        assert_eq!(equalize_value_channel(&img), img);
    }

    #[test]
    fn quarter_split_two_level() {
        // 25% at 50, 75% at 200: the low level sits at cdf_min -> 0, the
        // high level at N -> 255.
        let mut vs = vec![50u8; 4];
        vs.extend_from_slice(&[200; 12]);
        let img = hsv_from_v(4, 4, &vs);
        let e = equalize_value_channel(&img);
        assert_eq!(e.pixel(0, 0).2, 0);
        assert_eq!(e.pixel(3, 3).2, 255);
    }

    #[test]
    fn monotone_in_v() {
        // Equalization must never invert brightness order.
        let vs: Vec<u8> = (0..64).map(|i| (i * 97 % 256) as u8).collect();
        let img = hsv_from_v(8, 8, &vs);
        let e = equalize_value_channel(&img);
        let mut pairs: Vec<(u8, u8)> = (0..64)
            .map(|i| (vs[i], e.pixel(i % 8, i / 8).2))
            .collect();
        pairs.sort();
        for w in pairs.windows(2) {
            assert!(w[0].1 <= w[1].1, "inversion: {:?} -> {:?}", w[0], w[1]);
        }
    }

    #[test]
    fn idempotent_on_already_equalized_two_level() {
        let mut vs = vec![0u8; 8];
        vs.extend_from_slice(&[255; 8]);
        let img = hsv_from_v(4, 4, &vs);
        assert_eq!(equalize_value_channel(&img), img);
    }
}
