//! Specular-light minimization.
//!
//! Per pixel, the specular component is estimated as
//! s = (max_u I_u - lambda_max * sum_u I_u) / (1 - 3 lambda_max) and
//! subtracted from every channel. lambda_max must exceed 1/3 or the
//! denominator vanishes.
//!
//! A direct algebraic consequence: any achromatic pixel (v,v,v) has
//! s = v and maps to (0,0,0). Snow is achromatic, so pipelines aimed at
//! snowy scenes keep this stage disabled unless glare dominates.

use crate::buffer::{quantize_u8, RgbImage};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LightFilterParams {
    /// Chromaticity bound, in (1/3, 1].
    pub lambda_max: f64,
}

impl Default for LightFilterParams {
    fn default() -> Self {
        Self { lambda_max: 0.6 }
    }
}

impl LightFilterParams {
    pub fn validate(&self) -> Result<()> {
        if !self.lambda_max.is_finite() || self.lambda_max <= 1.0 / 3.0 || self.lambda_max > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda_max must be in (1/3, 1], got {}",
                self.lambda_max
            )));
        }
        Ok(())
    }
}

pub fn light_filter(img: &RgbImage, p: &LightFilterParams) -> Result<RgbImage> {
    p.validate()?;
    let lambda = p.lambda_max;
    // Sequential subtraction: for decimal-looking lambdas (0.6, 0.75, ...)
    // each step is exact where `1.0 - 3.0 * lambda` picks up a rounding
    // error that can flip half-up roundings downstream.
    let denom = 1.0 - lambda - lambda - lambda;
    let mut out = RgbImage::new(img.width(), img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (r, g, b) = img.pixel(x, y);
            let (rf, gf, bf) = (r as f64, g as f64, b as f64);
            let maxc = rf.max(gf).max(bf);
            let sum = rf + gf + bf;
            let s = (maxc - lambda * sum) / denom;
            out.set_pixel(
                x,
                y,
                (
                    quantize_u8(rf - s),
                    quantize_u8(gf - s),
                    quantize_u8(bf - s),
                ),
            );
        }
    }
    Ok(out)
}
