//! End-to-end detection pipeline and its configuration.
//!
//! Stage order: rain/snow removal and shadow removal operate in RGB, then
//! the optional specular-light filter (also RGB), then HSV conversion,
//! Gaussian blur, histogram equalization, snow classification,
//! opening-closing, triangle fit, and road extraction. Every stage is
//! deterministic, so a fixed input and config always produce the same
//! result bit for bit.

use crate::buffer::{BinaryMask, HsvImage, RgbImage};
use crate::colorspace::rgb_to_hsv;
use crate::error::{Error, Result};
use crate::filters::{
    detect_shadow_mask, equalize_value_channel, gaussian_blur_hsv, light_filter,
    remove_rain_snow, remove_shadow, LightFilterParams, RainSnowParams, ShadowParams,
};
use crate::kv::{parse_bool, parse_kv, parse_num, unknown_key};
use crate::segmentation::{classify_snow, open_close, SnowThresholds, StructuringElement};
use crate::vanishing::{
    check_min_base_width, extract_road, fit_triangle, RoadRegion, VanishingPoint,
};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PipelineConfig {
    /// Blur strength; 0 disables the blur stage entirely.
    pub gaussian_sigma: f64,
    pub equalize: bool,
    /// Off by default: the specular filter zeroes achromatic pixels,
    /// which would erase the snow the classifier is looking for.
    pub light_filter: bool,
    pub light: LightFilterParams,
    pub shadow: bool,
    pub shadow_params: ShadowParams,
    pub rain_snow: bool,
    pub rain_snow_params: RainSnowParams,
    pub snow_thresholds: SnowThresholds,
    pub se: StructuringElement,
    /// Minimum fraction of image pixels that must classify as snow.
    pub min_coverage: f64,
    /// Minimum fitted base width as a fraction of image width.
    pub min_base_width_frac: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            gaussian_sigma: 1.5,
            equalize: true,
            light_filter: false,
            light: LightFilterParams::default(),
            shadow: true,
            shadow_params: ShadowParams::default(),
            rain_snow: true,
            rain_snow_params: RainSnowParams::default(),
            snow_thresholds: SnowThresholds::default(),
            se: StructuringElement::default(),
            min_coverage: 0.02,
            min_base_width_frac: 0.10,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.gaussian_sigma.is_finite() || self.gaussian_sigma < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "gaussian_sigma must be finite and >= 0 (0 = off), got {}",
                self.gaussian_sigma
            )));
        }
        if self.light_filter {
            self.light
                .validate()
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        }
        if self.shadow && self.shadow_params.buffer_radius == 0 {
            return Err(Error::InvalidConfig(
                "shadow_buffer_radius must be >= 1".into(),
            ));
        }
        if self.rain_snow && self.rain_snow_params.median_radius == 0 {
            return Err(Error::InvalidConfig(
                "rain_snow_median_radius must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.rain_snow_params.alpha) {
            return Err(Error::InvalidConfig(format!(
                "rain_snow_alpha {} outside [0, 1]",
                self.rain_snow_params.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.min_coverage) || !self.min_coverage.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "min_coverage {} outside [0, 1]",
                self.min_coverage
            )));
        }
        if !(0.0..=1.0).contains(&self.min_base_width_frac) {
            return Err(Error::InvalidConfig(format!(
                "min_base_width_frac {} outside [0, 1]",
                self.min_base_width_frac
            )));
        }
        Ok(())
    }

    /// Parses the flat key=value config format; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        let mut se_w = cfg.se.width();
        let mut se_h = cfg.se.height();
        for (key, val) in parse_kv(text)? {
            match key.as_str() {
                "gaussian_sigma" => cfg.gaussian_sigma = parse_num(&key, &val)?,
                "equalize" => cfg.equalize = parse_bool(&key, &val)?,
                "light_filter" => cfg.light_filter = parse_bool(&key, &val)?,
                "lambda_max" => cfg.light.lambda_max = parse_num(&key, &val)?,
                "shadow" => cfg.shadow = parse_bool(&key, &val)?,
                "shadow_v_threshold" => cfg.shadow_params.v_threshold = parse_num(&key, &val)?,
                "shadow_s_threshold" => cfg.shadow_params.s_threshold = parse_num(&key, &val)?,
                "shadow_buffer_radius" => {
                    cfg.shadow_params.buffer_radius = parse_num(&key, &val)?
                }
                "rain_snow" => cfg.rain_snow = parse_bool(&key, &val)?,
                "rain_snow_median_radius" => {
                    cfg.rain_snow_params.median_radius = parse_num(&key, &val)?
                }
                "rain_snow_streak_threshold" => {
                    cfg.rain_snow_params.streak_threshold = parse_num(&key, &val)?
                }
                "rain_snow_alpha" => cfg.rain_snow_params.alpha = parse_num(&key, &val)?,
                "snow_s_max" => cfg.snow_thresholds.s_max = parse_num(&key, &val)?,
                "snow_v_min" => cfg.snow_thresholds.v_min = parse_num(&key, &val)?,
                "se_width" => se_w = parse_num(&key, &val)?,
                "se_height" => se_h = parse_num(&key, &val)?,
                "min_coverage" => cfg.min_coverage = parse_num(&key, &val)?,
                "min_base_width_frac" => cfg.min_base_width_frac = parse_num(&key, &val)?,
                _ => return Err(unknown_key(&key)),
            }
        }
        cfg.se = StructuringElement::rect(se_w, se_h)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes in the same key=value format `parse` accepts.
    pub fn to_config_string(&self) -> String {
        format!(
            "gaussian_sigma = {}\nequalize = {}\n\
             light_filter = {}\nlambda_max = {}\n\
             shadow = {}\nshadow_v_threshold = {}\nshadow_s_threshold = {}\n\
             shadow_buffer_radius = {}\n\
             rain_snow = {}\nrain_snow_median_radius = {}\n\
             rain_snow_streak_threshold = {}\nrain_snow_alpha = {}\n\
             snow_s_max = {}\nsnow_v_min = {}\n\
             se_width = {}\nse_height = {}\n\
             min_coverage = {}\nmin_base_width_frac = {}\n",
            self.gaussian_sigma,
            self.equalize,
            self.light_filter,
            self.light.lambda_max,
            self.shadow,
            self.shadow_params.v_threshold,
            self.shadow_params.s_threshold,
            self.shadow_params.buffer_radius,
            self.rain_snow,
            self.rain_snow_params.median_radius,
            self.rain_snow_params.streak_threshold,
            self.rain_snow_params.alpha,
            self.snow_thresholds.s_max,
            self.snow_thresholds.v_min,
            self.se.width(),
            self.se.height(),
            self.min_coverage,
            self.min_base_width_frac,
        )
    }
}

/// Intermediate image kept for `--dump-stages`.
#[derive(Debug, Clone, PartialEq)]
pub enum StageArtifact {
    Hsv(HsvImage),
    Mask(BinaryMask),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub road: RoadRegion,
    pub vanishing_point: VanishingPoint,
    /// (stage name, image) pairs in stage order; None unless requested.
    pub stage_artifacts: Option<Vec<(String, StageArtifact)>>,
}

/// Stage timings in milliseconds, in execution order; skipped stages are
/// absent.
pub type StageTimings = Vec<(String, f64)>;

fn run(
    img: &RgbImage,
    cfg: &PipelineConfig,
    keep_artifacts: bool,
) -> Result<(DetectionResult, StageTimings)> {
    cfg.validate()?;
    let mut timings: StageTimings = Vec::new();
    let mut artifacts: Vec<(String, StageArtifact)> = Vec::new();
    let mut rgb = img.clone();

    if cfg.rain_snow {
        let t0 = Instant::now();
        rgb = remove_rain_snow(&rgb, &cfg.rain_snow_params)?;
        timings.push(("rain_snow".into(), t0.elapsed().as_secs_f64() * 1e3));
    }
    if cfg.shadow {
        let t0 = Instant::now();
        let hsv_pre = rgb_to_hsv(&rgb);
        let mask = detect_shadow_mask(&hsv_pre, &cfg.shadow_params);
        rgb = remove_shadow(&rgb, &mask, &cfg.shadow_params);
        timings.push(("shadow".into(), t0.elapsed().as_secs_f64() * 1e3));
    }
    if cfg.light_filter {
        let t0 = Instant::now();
        rgb = light_filter(&rgb, &cfg.light)?;
        timings.push(("light_filter".into(), t0.elapsed().as_secs_f64() * 1e3));
    }

    let t0 = Instant::now();
    let mut hsv = rgb_to_hsv(&rgb);
    timings.push(("hsv".into(), t0.elapsed().as_secs_f64() * 1e3));
    if keep_artifacts {
        artifacts.push(("hsv".into(), StageArtifact::Hsv(hsv.clone())));
    }

    if cfg.gaussian_sigma > 0.0 {
        let t0 = Instant::now();
        hsv = gaussian_blur_hsv(&hsv, cfg.gaussian_sigma)?;
        timings.push(("blur".into(), t0.elapsed().as_secs_f64() * 1e3));
    }
    if keep_artifacts {
        artifacts.push(("blurred".into(), StageArtifact::Hsv(hsv.clone())));
    }

    if cfg.equalize {
        let t0 = Instant::now();
        hsv = equalize_value_channel(&hsv);
        timings.push(("equalize".into(), t0.elapsed().as_secs_f64() * 1e3));
    }
    if keep_artifacts {
        artifacts.push(("equalized".into(), StageArtifact::Hsv(hsv.clone())));
    }

    let t0 = Instant::now();
    let snow = classify_snow(&hsv, &cfg.snow_thresholds);
    timings.push(("classify".into(), t0.elapsed().as_secs_f64() * 1e3));
    if keep_artifacts {
        artifacts.push(("snow-mask".into(), StageArtifact::Mask(snow.clone())));
    }

    let t0 = Instant::now();
    let opened = open_close(&snow, &cfg.se);
    timings.push(("morphology".into(), t0.elapsed().as_secs_f64() * 1e3));
    if keep_artifacts {
        artifacts.push(("opened".into(), StageArtifact::Mask(opened.clone())));
    }

    let t0 = Instant::now();
    let triangle = fit_triangle(&opened, cfg.min_coverage)?;
    check_min_base_width(&triangle, img.width(), cfg.min_base_width_frac)?;
    timings.push(("fit".into(), t0.elapsed().as_secs_f64() * 1e3));

    let t0 = Instant::now();
    let road = extract_road(&opened, &triangle);
    timings.push(("extract".into(), t0.elapsed().as_secs_f64() * 1e3));

    let vanishing_point = triangle.vanishing_point();
    Ok((
        DetectionResult {
            road,
            vanishing_point,
            stage_artifacts: keep_artifacts.then_some(artifacts),
        },
        timings,
    ))
}

pub fn run_pipeline(img: &RgbImage, cfg: &PipelineConfig) -> Result<DetectionResult> {
    run(img, cfg, false).map(|(r, _)| r)
}

/// Like `run_pipeline`, plus per-stage wall-clock timings.
pub fn run_pipeline_timed(
    img: &RgbImage,
    cfg: &PipelineConfig,
) -> Result<(DetectionResult, StageTimings)> {
    run(img, cfg, false)
}

/// Like `run_pipeline`, but records the intermediate stage images
/// (hsv, blurred, equalized, snow-mask, opened) for dumping.
pub fn run_pipeline_with_artifacts(
    img: &RgbImage,
    cfg: &PipelineConfig,
) -> Result<(DetectionResult, StageTimings)> {
    run(img, cfg, true)
}
