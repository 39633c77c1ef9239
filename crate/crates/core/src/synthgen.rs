//! Seeded synthetic snowy-forest scenes with exact ground-truth masks.
//!
//! Scenes are built from a road triangle (optionally bent into a curve),
//! Gaussian-perturbed snow and foliage colors, snow specks scattered in
//! the foliage, and falling-snow streaks blended in by exposure ratio.
//! Every sample is drawn from a ChaCha8 stream seeded by the spec, so a
//! given spec always renders the same bytes — corpora regenerate
//! bit-identically for reproducible evaluation runs.

use crate::buffer::{quantize_u8, round_half_up, BinaryMask, RgbImage};
use crate::colorspace::rgb_to_hsv_pixel;
use crate::error::{Error, Result};
use crate::filters::simulate_rain_snow;
use crate::io::{save_image, save_mask};
use crate::kv::{parse_kv, parse_num, unknown_key};
use crate::segmentation::SnowThresholds;
use crate::vanishing::{rasterize_triangle, Triangle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

/// Mean color plus per-channel standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ColorModel {
    pub mean: [u8; 3],
    pub std_dev: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    /// Generating road shape; ground truth is derived from it.
    pub road: Triangle,
    /// 0 = straight; nonzero bends the road center line quadratically.
    pub curvature: f64,
    pub snow_color: ColorModel,
    pub foliage_color: ColorModel,
    /// Snow specks dropped into the foliage, this many, each
    /// speck_size x speck_size pixels.
    pub speck_count: usize,
    pub speck_size: usize,
    /// Exposure ratio for falling-snow streaks; 0 disables them.
    pub streak_alpha: f64,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            width: 320,
            height: 240,
            road: Triangle {
                apex_x: 160.0,
                apex_y: 60.0,
                base_left: 40,
                base_right: 280,
                base_y: 239,
            },
            curvature: 0.0,
            snow_color: ColorModel {
                mean: [235, 240, 245],
                std_dev: [5.0, 5.0, 5.0],
            },
            foliage_color: ColorModel {
                mean: [45, 85, 40],
                std_dev: [10.0, 12.0, 9.0],
            },
            speck_count: 40,
            speck_size: 3,
            streak_alpha: 0.3,
            seed: 1,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width < 16 || self.height < 16 {
            return Err(Error::InvalidSpec(format!(
                "scene {}x{} too small; need at least 16x16",
                self.width, self.height
            )));
        }
        self.road
            .validate(self.width, self.height)
            .map_err(|e| Error::InvalidSpec(format!("road: {e}")))?;
        if !self.curvature.is_finite() {
            return Err(Error::InvalidSpec("curvature must be finite".into()));
        }
        for (name, c) in [("snow_color", &self.snow_color), ("foliage_color", &self.foliage_color)] {
            if c.std_dev.iter().any(|s| !s.is_finite() || *s < 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "{name}: std must be finite and >= 0"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.streak_alpha) {
            return Err(Error::InvalidSpec(format!(
                "streak_alpha {} outside [0, 1]",
                self.streak_alpha
            )));
        }
        if self.speck_count > 0
            && (self.speck_size == 0 || self.speck_size > self.width.min(self.height) / 4)
        {
            return Err(Error::InvalidSpec(format!(
                "speck_size {} unusable at {}x{}",
                self.speck_size, self.width, self.height
            )));
        }
        // The generated road must be classifiable as snow, or the ground
        // truth would be unreachable by construction.
        let [r, g, b] = self.snow_color.mean;
        let hsv = rgb_to_hsv_pixel(r, g, b);
        let t = SnowThresholds::default();
        if hsv.s > t.s_max || hsv.v < t.v_min {
            return Err(Error::InvalidSpec(format!(
                "snow_color mean ({r},{g},{b}) -> S={},V={} fails the default snow \
                 thresholds (S<={}, V>={})",
                hsv.s, hsv.v, t.s_max, t.v_min
            )));
        }
        Ok(())
    }
}

/// Standard normal via Box-Muller. Hand-rolled so the sample stream is
/// locked to this crate rather than to a distribution library's internals.
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = 1.0 - rng.random::<f64>(); // (0, 1]: keeps ln() finite
    let u2 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn sample_color(m: &ColorModel, rng: &mut ChaCha8Rng) -> (u8, u8, u8) {
    (
        quantize_u8(m.mean[0] as f64 + m.std_dev[0] * normal(rng)),
        quantize_u8(m.mean[1] as f64 + m.std_dev[1] * normal(rng)),
        quantize_u8(m.mean[2] as f64 + m.std_dev[2] * normal(rng)),
    )
}

/// Ground-truth road mask. Straight roads defer to the triangle raster;
/// curved roads shift each row's span by curvature*(base_y - y)^2/base_y
/// while keeping its width.
fn road_mask(spec: &SceneSpec) -> BinaryMask {
    if spec.curvature == 0.0 {
        return rasterize_triangle(&spec.road, spec.width, spec.height);
    }
    let t = &spec.road;
    let mut out = BinaryMask::new(spec.width, spec.height);
    let d = t.base_y as f64 - t.apex_y;
    let y0 = t.apex_y.max(0.0).ceil() as usize;
    for y in y0..=t.base_y.min(spec.height - 1) {
        let f = (y as f64 - t.apex_y) / d;
        let l = t.apex_x + f * (t.base_left as f64 - t.apex_x);
        let r = t.apex_x + f * (t.base_right as f64 - t.apex_x);
        let shift = spec.curvature * (t.base_y as f64 - y as f64).powi(2) / t.base_y as f64;
        let xl = ((l + shift).ceil() as i64).max(0);
        let xr = ((r + shift).floor() as i64).min(spec.width as i64 - 1);
        for x in xl..=xr {
            out.set(x as usize, y, true);
        }
    }
    out
}

/// True when any road bit falls within `margin` of the given rectangle.
fn near_road(road: &BinaryMask, x0: usize, y0: usize, size: usize, margin: usize) -> bool {
    let x_lo = x0.saturating_sub(margin);
    let y_lo = y0.saturating_sub(margin);
    let x_hi = (x0 + size + margin).min(road.width());
    let y_hi = (y0 + size + margin).min(road.height());
    for y in y_lo..y_hi {
        for x in x_lo..x_hi {
            if road.get(x, y) {
                return true;
            }
        }
    }
    false
}

fn paint_specks(
    img: &mut RgbImage,
    road: &BinaryMask,
    spec: &SceneSpec,
    rng: &mut ChaCha8Rng,
) {
    let (w, h) = (spec.width, spec.height);
    let size = spec.speck_size;
    // Specks keep 6 px clear of the road (so they stay pure background
    // clutter) and 2 px clear of each other (so no two merge into a blob
    // big enough to survive the default opening).
    let mut placed = BinaryMask::new(w, h);
    for _ in 0..spec.speck_count {
        for _attempt in 0..100 {
            let x0 = rng.random_range(0..=w - size);
            let y0 = rng.random_range(0..=h - size);
            if near_road(road, x0, y0, size, 6) || near_road(&placed, x0, y0, size, 2) {
                continue;
            }
            for y in y0..y0 + size {
                for x in x0..x0 + size {
                    img.set_pixel(x, y, sample_color(&spec.snow_color, rng));
                    placed.set(x, y, true);
                }
            }
            break;
        }
    }
}

fn paint_streaks(canvas: &mut RgbImage, rng: &mut ChaCha8Rng) {
    let (w, h) = (canvas.width(), canvas.height());
    let count = (w * h / 2400).max(4);
    for _ in 0..count {
        let x0 = rng.random_range(0..w) as f64;
        let y0 = rng.random_range(0..(h * 4 / 5).max(1));
        let len = rng.random_range(8..=22);
        let drift = rng.random_range(-0.4..0.4);
        let brightness: u8 = rng.random_range(225..=255);
        let width = rng.random_range(1..=2usize);
        for t in 0..len {
            let y = y0 + t;
            if y >= h {
                break;
            }
            let xc = round_half_up(x0 + t as f64 * drift);
            for dx in 0..width as i64 {
                let x = xc + dx;
                if x >= 0 && x < w as i64 {
                    canvas.set_pixel(x as usize, y, (brightness, brightness, brightness));
                }
            }
        }
    }
}

/// Renders one scene; returns the image and its exact road mask.
pub fn generate_scene(spec: &SceneSpec) -> Result<(RgbImage, BinaryMask)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let road = road_mask(spec);

    let mut img = RgbImage::new(spec.width, spec.height);
    for y in 0..spec.height {
        for x in 0..spec.width {
            let model = if road.get(x, y) {
                &spec.snow_color
            } else {
                &spec.foliage_color
            };
            img.set_pixel(x, y, sample_color(model, &mut rng));
        }
    }
    if spec.speck_count > 0 {
        paint_specks(&mut img, &road, spec, &mut rng);
    }
    if spec.streak_alpha > 0.0 {
        // The streak layer starts as the scene itself, so the blend is a
        // pixel-exact no-op everywhere a streak was not drawn.
        let mut canvas = img.clone();
        paint_streaks(&mut canvas, &mut rng);
        img = simulate_rain_snow(&img, &canvas, spec.streak_alpha)?;
    }
    Ok((img, road))
}

const JITTER_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// The spec that `generate_corpus` renders at `index`: scene seed is
/// `seed + index`, and the road geometry is jittered around the base
/// spec's road by a salted stream of the same derived seed.
pub fn derived_spec(base: &SceneSpec, seed: u64, index: usize) -> SceneSpec {
    let scene_seed = seed.wrapping_add(index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(scene_seed ^ JITTER_SALT);
    let (w, h) = (base.width as f64, base.height as f64);
    let road = &base.road;

    let apex_x = (road.apex_x + rng.random_range(-0.05..0.05) * w).clamp(2.0, w - 3.0);
    let apex_y_cap = road.base_y as f64 * 0.6;
    let apex_y = (road.apex_y + rng.random_range(-0.04..0.04) * h).clamp(1.0, apex_y_cap);
    let jitter_b = 0.03 * w;
    let bl = (road.base_left as f64 + rng.random_range(-jitter_b..jitter_b))
        .round()
        .max(1.0) as usize;
    let mut br = (road.base_right as f64 + rng.random_range(-jitter_b..jitter_b))
        .round()
        .min(w - 2.0) as usize;
    let min_width = (base.width / 5).max(4);
    if br < bl + min_width {
        br = (bl + min_width).min(base.width - 2);
    }

    SceneSpec {
        road: Triangle {
            apex_x,
            apex_y,
            base_left: bl,
            base_right: br,
            base_y: road.base_y,
        },
        seed: scene_seed,
        ..base.clone()
    }
}

/// Renders `n` jittered scenes with ids "000", "001", ...
pub fn generate_corpus(
    base: &SceneSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<(RgbImage, BinaryMask, String)>> {
    if n == 0 {
        return Err(Error::InvalidSpec("corpus size must be >= 1".into()));
    }
    (0..n)
        .map(|i| {
            let spec = derived_spec(base, seed, i);
            let (img, mask) = generate_scene(&spec)?;
            Ok((img, mask, format!("{i:03}")))
        })
        .collect()
}

/// Writes a corpus to `<dir>/images/<id>.ppm`, `<dir>/truth/<id>.pgm`,
/// and a `corpus.json` echoing the base spec. Returns the image ids.
pub fn write_corpus(base: &SceneSpec, n: usize, seed: u64, dir: &Path) -> Result<Vec<String>> {
    let scenes = generate_corpus(base, n, seed)?;
    std::fs::create_dir_all(dir.join("images"))?;
    std::fs::create_dir_all(dir.join("truth"))?;
    let mut ids = Vec::with_capacity(scenes.len());
    for (img, mask, id) in &scenes {
        save_image(img, &dir.join("images").join(format!("{id}.ppm")))?;
        save_mask(mask, &dir.join("truth").join(format!("{id}.pgm")))?;
        ids.push(id.clone());
    }
    #[derive(serde::Serialize)]
    struct CorpusMeta<'a> {
        seed: u64,
        n: usize,
        spec: &'a SceneSpec,
    }
    let meta = CorpusMeta { seed, n, spec: base };
    let json = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::CorruptData(format!("corpus.json: {e}")))?;
    std::fs::write(dir.join("corpus.json"), json + "\n")?;
    Ok(ids)
}

impl SceneSpec {
    /// Parses the flat key=value scene format; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = SceneSpec::default();
        for (key, val) in parse_kv(text)? {
            match key.as_str() {
                "width" => spec.width = parse_num(&key, &val)?,
                "height" => spec.height = parse_num(&key, &val)?,
                "road_apex_x" => spec.road.apex_x = parse_num(&key, &val)?,
                "road_apex_y" => spec.road.apex_y = parse_num(&key, &val)?,
                "road_base_left" => spec.road.base_left = parse_num(&key, &val)?,
                "road_base_right" => spec.road.base_right = parse_num(&key, &val)?,
                "road_base_y" => spec.road.base_y = parse_num(&key, &val)?,
                "curvature" => spec.curvature = parse_num(&key, &val)?,
                "snow_mean_r" => spec.snow_color.mean[0] = parse_num(&key, &val)?,
                "snow_mean_g" => spec.snow_color.mean[1] = parse_num(&key, &val)?,
                "snow_mean_b" => spec.snow_color.mean[2] = parse_num(&key, &val)?,
                "snow_std_r" => spec.snow_color.std_dev[0] = parse_num(&key, &val)?,
                "snow_std_g" => spec.snow_color.std_dev[1] = parse_num(&key, &val)?,
                "snow_std_b" => spec.snow_color.std_dev[2] = parse_num(&key, &val)?,
                "foliage_mean_r" => spec.foliage_color.mean[0] = parse_num(&key, &val)?,
                "foliage_mean_g" => spec.foliage_color.mean[1] = parse_num(&key, &val)?,
                "foliage_mean_b" => spec.foliage_color.mean[2] = parse_num(&key, &val)?,
                "foliage_std_r" => spec.foliage_color.std_dev[0] = parse_num(&key, &val)?,
                "foliage_std_g" => spec.foliage_color.std_dev[1] = parse_num(&key, &val)?,
                "foliage_std_b" => spec.foliage_color.std_dev[2] = parse_num(&key, &val)?,
                "speck_count" => spec.speck_count = parse_num(&key, &val)?,
                "speck_size" => spec.speck_size = parse_num(&key, &val)?,
                "streak_alpha" => spec.streak_alpha = parse_num(&key, &val)?,
                "seed" => spec.seed = parse_num(&key, &val)?,
                _ => return Err(unknown_key(&key)),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Serializes in the same key=value format `parse` accepts.
    pub fn to_config_string(&self) -> String {
        format!(
            "width = {}\nheight = {}\n\
             road_apex_x = {}\nroad_apex_y = {}\n\
             road_base_left = {}\nroad_base_right = {}\nroad_base_y = {}\n\
             curvature = {}\n\
             snow_mean_r = {}\nsnow_mean_g = {}\nsnow_mean_b = {}\n\
             snow_std_r = {}\nsnow_std_g = {}\nsnow_std_b = {}\n\
             foliage_mean_r = {}\nfoliage_mean_g = {}\nfoliage_mean_b = {}\n\
             foliage_std_r = {}\nfoliage_std_g = {}\nfoliage_std_b = {}\n\
             speck_count = {}\nspeck_size = {}\nstreak_alpha = {}\nseed = {}\n",
            self.width,
            self.height,
            self.road.apex_x,
            self.road.apex_y,
            self.road.base_left,
            self.road.base_right,
            self.road.base_y,
            self.curvature,
            self.snow_color.mean[0],
            self.snow_color.mean[1],
            self.snow_color.mean[2],
            self.snow_color.std_dev[0],
            self.snow_color.std_dev[1],
            self.snow_color.std_dev[2],
            self.foliage_color.mean[0],
            self.foliage_color.mean[1],
            self.foliage_color.mean[2],
            self.foliage_color.std_dev[0],
            self.foliage_color.std_dev[1],
            self.foliage_color.std_dev[2],
            self.speck_count,
            self.speck_size,
            self.streak_alpha,
            self.seed,
        )
    }
}
