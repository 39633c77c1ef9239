//! Separable Gaussian blur.

use crate::buffer::{quantize_u8, GrayImage, HsvImage};
use crate::error::{Error, Result};

/// Normalized 1-D kernel with radius ceil(3*sigma).
fn kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i as f64).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    for w in &mut k {
        *w /= sum;
    }
    k
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gaussian sigma must be finite and > 0, got {sigma}"
        )));
    }
    Ok(())
}

/// Blur one channel held as f64; horizontal then vertical pass, edges
/// replicated. No quantization here.
fn blur_plane(plane: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let radius = (k.len() / 2) as i64;
    let mut tmp = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kw) in k.iter().enumerate() {
                let xx = (x as i64 + i as i64 - radius).clamp(0, w as i64 - 1) as usize;
                acc += kw * plane[y * w + xx];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kw) in k.iter().enumerate() {
                let yy = (y as i64 + i as i64 - radius).clamp(0, h as i64 - 1) as usize;
                acc += kw * tmp[yy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Blurs all three HSV planes independently. Hue is stored in half-degree
/// units; blurring it as a plain scalar is intentional here because the
/// upstream scenes put hue discontinuities only at object borders, where
/// the snow classifier keys on S and V anyway.
pub fn gaussian_blur_hsv(img: &HsvImage, sigma: f64) -> Result<HsvImage> {
    check_sigma(sigma)?;
    let (w, h) = (img.width(), img.height());
    let k = kernel(sigma);
    let mut planes = [
        vec![0.0f64; w * h],
        vec![0.0f64; w * h],
        vec![0.0f64; w * h],
    ];
    for y in 0..h {
        for x in 0..w {
            let (hh, s, v) = img.pixel(x, y);
            planes[0][y * w + x] = hh as f64;
            planes[1][y * w + x] = s as f64;
            planes[2][y * w + x] = v as f64;
        }
    }
    let blurred: Vec<Vec<f64>> = planes.iter().map(|p| blur_plane(p, w, h, &k)).collect();
    let mut out = HsvImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            // A convex combination of values <= 179 stays <= 179, so the
            // quantized hue cannot escape its range.
            out.set_pixel(
                x,
                y,
                (
                    quantize_u8(blurred[0][i]),
                    quantize_u8(blurred[1][i]),
                    quantize_u8(blurred[2][i]),
                ),
            );
        }
    }
    Ok(out)
}

pub fn gaussian_blur_gray(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    check_sigma(sigma)?;
    let (w, h) = (img.width(), img.height());
    let k = kernel(sigma);
    let plane: Vec<f64> = img.data().iter().map(|&v| v as f64).collect();
    let blurred = blur_plane(&plane, w, h, &k);
    let mut out = GrayImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            out.set(x, y, quantize_u8(blurred[y * w + x]));
        }
    }
    Ok(out)
}
