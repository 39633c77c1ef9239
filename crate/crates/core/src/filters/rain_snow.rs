//! Rain and snow streak simulation and removal.
//!
//! The streak model mixes a streak layer over a clean frame by exposure
//! ratio alpha. Removal works from a median-filtered background estimate:
//! pixels much brighter than their background are streaks, and each one is
//! replaced by the background color rescaled toward a guidance intensity
//! that averages the background with a destreaked copy of the input.

use crate::buffer::{luma_u8, quantize_u8, BinaryMask, RgbImage};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RainSnowParams {
    /// Median window radius for the background estimate, >= 1.
    pub median_radius: usize,
    /// A pixel is a streak when gray(img) - gray(background) exceeds this.
    pub streak_threshold: u8,
    /// Exposure mixing ratio used when *simulating* streaks, in [0, 1].
    pub alpha: f64,
}

impl Default for RainSnowParams {
    fn default() -> Self {
        Self {
            median_radius: 2,
            streak_threshold: 40,
            alpha: 0.5,
        }
    }
}

/// Mixes a streak layer over a clean frame:
/// out = round(alpha * streak + (1 - alpha) * clean), per sample.
pub fn simulate_rain_snow(clean: &RgbImage, streaks: &RgbImage, alpha: f64) -> Result<RgbImage> {
    if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha must be in [0, 1], got {alpha}"
        )));
    }
    if clean.width() != streaks.width() || clean.height() != streaks.height() {
        return Err(Error::DimensionMismatch(format!(
            "clean {}x{} vs streaks {}x{}",
            clean.width(),
            clean.height(),
            streaks.width(),
            streaks.height()
        )));
    }
    let mut out = RgbImage::new(clean.width(), clean.height());
    for y in 0..clean.height() {
        for x in 0..clean.width() {
            let c = clean.pixel(x, y);
            let s = streaks.pixel(x, y);
            out.set_pixel(
                x,
                y,
                (
                    quantize_u8(alpha * s.0 as f64 + (1.0 - alpha) * c.0 as f64),
                    quantize_u8(alpha * s.1 as f64 + (1.0 - alpha) * c.1 as f64),
                    quantize_u8(alpha * s.2 as f64 + (1.0 - alpha) * c.2 as f64),
                ),
            );
        }
    }
    Ok(out)
}

/// Channelwise median filter; windows truncate at the frame border. For
/// even-sized border windows the upper median (sorted[len/2]) is taken.
pub fn background_estimate(img: &RgbImage, median_radius: usize) -> Result<RgbImage> {
    if median_radius == 0 {
        return Err(Error::InvalidParameter(
            "median_radius must be >= 1".into(),
        ));
    }
    let (w, h) = (img.width(), img.height());
    let r = median_radius as isize;
    let mut out = RgbImage::new(w, h);
    let mut window: Vec<u8> = Vec::with_capacity((2 * median_radius + 1).pow(2));
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut med = [0u8; 3];
            for (c, slot) in med.iter_mut().enumerate() {
                window.clear();
                for dy in -r..=r {
                    let yy = y + dy;
                    if yy < 0 || yy >= h as isize {
                        continue;
                    }
                    for dx in -r..=r {
                        let xx = x + dx;
                        if xx < 0 || xx >= w as isize {
                            continue;
                        }
                        let px = img.pixel(xx as usize, yy as usize);
                        window.push(match c {
                            0 => px.0,
                            1 => px.1,
                            _ => px.2,
                        });
                    }
                }
                window.sort_unstable();
                *slot = window[window.len() / 2];
            }
            out.set_pixel(x as usize, y as usize, (med[0], med[1], med[2]));
        }
    }
    Ok(out)
}

/// bit = gray(img) - gray(background) > threshold (strict).
pub fn streak_mask(img: &RgbImage, background: &RgbImage, threshold: u8) -> Result<BinaryMask> {
    if img.width() != background.width() || img.height() != background.height() {
        return Err(Error::DimensionMismatch(format!(
            "image {}x{} vs background {}x{}",
            img.width(),
            img.height(),
            background.width(),
            background.height()
        )));
    }
    let g_img = img.to_gray();
    let g_bg = background.to_gray();
    let mut out = BinaryMask::new(img.width(), img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            let d = g_img.get(x, y) as i32 - g_bg.get(x, y) as i32;
            out.set(x, y, d > threshold as i32);
        }
    }
    Ok(out)
}

/// Guidance intensity: the average of the background gray and the
/// destreaked gray, rounded half-up.
fn guidance(background_gray: u8, destreaked_gray: u8) -> u8 {
    quantize_u8((background_gray as f64 + destreaked_gray as f64) / 2.0)
}

/// Streak removal. Only pixels in the streak mask change:
/// each becomes the background color rescaled so its gray level equals the
/// guidance intensity (or flat gray when the background is black).
pub fn remove_rain_snow(img: &RgbImage, p: &RainSnowParams) -> Result<RgbImage> {
    let bg = background_estimate(img, p.median_radius)?;
    let mask = streak_mask(img, &bg, p.streak_threshold)?;
    let g_bg = bg.to_gray();

    let mut out = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if !mask.get(x, y) {
                continue;
            }
            let i = img.pixel(x, y);
            let b = bg.pixel(x, y);
            // Subtracting the streak component (img - bg, floored at 0)
            // leaves the channelwise minimum of image and background.
            let destreaked = (i.0.min(b.0), i.1.min(b.1), i.2.min(b.2));
            let j_g = luma_u8(destreaked.0, destreaked.1, destreaked.2);
            let bg_gray = g_bg.get(x, y);
            let i_g = guidance(bg_gray, j_g);
            let px = if bg_gray == 0 {
                (i_g, i_g, i_g)
            } else {
                let scale = i_g as f64 / bg_gray as f64;
                (
                    quantize_u8(b.0 as f64 * scale),
                    quantize_u8(b.1 as f64 * scale),
                    quantize_u8(b.2 as f64 * scale),
                )
            };
            out.set_pixel(x, y, px);
        }
    }
    Ok(out)
}
