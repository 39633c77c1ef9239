//! Triangle fitting and vanishing-point extraction.
//!
//! The road in a perspective image is approximated by a triangle whose
//! base sits on the bottom image row; the apex is the vanishing point.
//! Fitting searches apex positions for maximum IoU between the rasterized
//! triangle and the snow mask, over a fixed base taken from the bottom
//! band of the mask.
//!
//! Pixels are treated as lattice points: pixel (x, y) is the point (x, y).
//! Rasterization is boundary-inclusive (a pixel exactly on an edge is in).

use crate::buffer::{round_half_up, BinaryMask};
use crate::error::{Error, Result};

/// Road triangle: real-valued apex over an integer base on row `base_y`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Triangle {
    pub apex_x: f64,
    pub apex_y: f64,
    pub base_left: usize,
    pub base_right: usize,
    pub base_y: usize,
}

impl Triangle {
    /// Checks the shape invariants against an image of the given size.
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if !self.apex_x.is_finite() || !self.apex_y.is_finite() {
            return Err(Error::InvalidParameter("triangle apex must be finite".into()));
        }
        if self.base_left >= self.base_right {
            return Err(Error::InvalidParameter(format!(
                "triangle base [{}, {}] must have base_left < base_right",
                self.base_left, self.base_right
            )));
        }
        if self.base_y >= height || self.base_right >= width {
            return Err(Error::InvalidParameter(format!(
                "triangle base exceeds {width}x{height} image"
            )));
        }
        if self.apex_y < 0.0 || self.apex_y >= self.base_y as f64 {
            return Err(Error::InvalidParameter(format!(
                "apex_y {} must satisfy 0 <= apex_y < base_y {}",
                self.apex_y, self.base_y
            )));
        }
        if self.apex_x < 0.0 || self.apex_x > (width - 1) as f64 {
            return Err(Error::InvalidParameter(format!(
                "apex_x {} outside image width {width}",
                self.apex_x
            )));
        }
        Ok(())
    }

    /// The apex, rounded half-up to the pixel grid.
    pub fn vanishing_point(&self) -> VanishingPoint {
        VanishingPoint {
            x: round_half_up(self.apex_x).max(0) as usize,
            y: round_half_up(self.apex_y).max(0) as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct VanishingPoint {
    pub x: usize,
    pub y: usize,
}

/// The fitted triangle plus the road pixels inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadRegion {
    pub triangle: Triangle,
    pub mask: BinaryMask,
}

/// Inclusive integer column span of triangle row `y`, clamped to the
/// image, or None when the row misses the triangle entirely.
///
/// Membership is decided by the exact edge constraints
///   C_L(x,y) = (x - ax)(by - ay) - (y - ay)(bl - ax) >= 0
///   C_R(x,y) = (x - ax)(by - ay) - (y - ay)(br - ax) <= 0
/// so rasterization and any point-in-triangle check agree bit-for-bit.
fn row_span(
    ax: f64,
    ay: f64,
    bl: usize,
    br: usize,
    by: usize,
    y: usize,
    width: usize,
) -> Option<(usize, usize)> {
    let yf = y as f64;
    if yf < ay || y > by {
        return None;
    }
    let d = by as f64 - ay;
    let (blf, brf) = (bl as f64, br as f64);
    let cl = |x: i64| (x as f64 - ax) * d - (yf - ay) * (blf - ax);
    let cr = |x: i64| (x as f64 - ax) * d - (yf - ay) * (brf - ax);

    let mut xl = (ax + (yf - ay) * (blf - ax) / d).ceil() as i64;
    while cl(xl - 1) >= 0.0 {
        xl -= 1;
    }
    while cl(xl) < 0.0 {
        xl += 1;
    }
    let mut xr = (ax + (yf - ay) * (brf - ax) / d).floor() as i64;
    while cr(xr + 1) <= 0.0 {
        xr += 1;
    }
    while cr(xr) > 0.0 {
        xr -= 1;
    }

    let xl = xl.max(0);
    let xr = xr.min(width as i64 - 1);
    if xl > xr {
        None
    } else {
        Some((xl as usize, xr as usize))
    }
}

/// Boundary-inclusive triangle raster.
pub fn rasterize_triangle(t: &Triangle, width: usize, height: usize) -> BinaryMask {
    let mut out = BinaryMask::new(width, height);
    if width == 0 || height == 0 {
        return out;
    }
    let y0 = t.apex_y.max(0.0).ceil() as usize;
    let y1 = t.base_y.min(height - 1);
    for y in y0..=y1 {
        if let Some((xl, xr)) = row_span(
            t.apex_x,
            t.apex_y,
            t.base_left,
            t.base_right,
            t.base_y,
            y,
            width,
        ) {
            for x in xl..=xr {
                out.set(x, y, true);
            }
        }
    }
    out
}

/// Intersection over union; 0 when both masks are empty.
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch(format!(
            "iou: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let mut inter = 0u64;
    let mut union = 0u64;
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        inter += (x && y) as u64;
        union += (x || y) as u64;
    }
    if union == 0 {
        Ok(0.0)
    } else {
        Ok(inter as f64 / union as f64)
    }
}

/// Nearest-rank percentile of a sorted slice.
fn percentile(sorted: &[usize], p: f64) -> usize {
    let n = sorted.len();
    let k = ((p * n as f64).ceil() as usize).clamp(1, n);
    sorted[k - 1]
}

const COARSE_STRIDE: usize = 8;

/// Fits the road triangle to a snow mask.
///
/// The base spans the 2nd percentile of per-row leftmost true columns to
/// the 98th percentile of per-row rightmost true columns, over the bottom
/// 10% of rows (at least one row); base_y is the bottom image row. Row
/// extremes rather than the raw bit population keep a clean mask's base
/// exact while still shedding rows polluted by stray specks on larger
/// bands. The apex maximizes IoU against the mask, searched on a stride-8
/// grid over the region above the base band and refined at stride 1 in
/// the 8-pixel neighborhood of the coarse optimum; ties prefer the
/// smallest apex_y, then the smallest apex_x.
///
/// The base estimate assumes perspective road geometry: the region widens
/// toward the bottom of the frame, i.e. the apex sits horizontally over
/// the base. A region slanted so far that an edge re-enters the base band
/// from above pulls the estimated base inward.
pub fn fit_triangle(snow: &BinaryMask, min_coverage: f64) -> Result<Triangle> {
    let (w, h) = (snow.width(), snow.height());
    let total = snow.count_true();
    if (total as f64) < min_coverage * (w * h) as f64 || total == 0 {
        return Err(Error::NoRoadDetected(format!(
            "snow coverage {}/{} below minimum fraction {min_coverage}",
            total,
            w * h
        )));
    }

    let band_rows = (round_half_up(0.10 * h as f64).max(1) as usize).min(h);
    let band_top = h - band_rows;
    if band_top == 0 {
        return Err(Error::DegenerateBase(
            "image too short to fit an apex above the base band".into(),
        ));
    }

    let mut lefts = Vec::with_capacity(band_rows);
    let mut rights = Vec::with_capacity(band_rows);
    for y in band_top..h {
        let mut first = None;
        let mut last = None;
        for x in 0..w {
            if snow.get(x, y) {
                if first.is_none() {
                    first = Some(x);
                }
                last = Some(x);
            }
        }
        if let (Some(f), Some(l)) = (first, last) {
            lefts.push(f);
            rights.push(l);
        }
    }
    if lefts.is_empty() {
        return Err(Error::DegenerateBase("no snow in the base band".into()));
    }
    lefts.sort_unstable();
    rights.sort_unstable();
    if lefts[0] == rights[rights.len() - 1] {
        return Err(Error::DegenerateBase(
            "base band covers a single column".into(),
        ));
    }
    let base_left = percentile(&lefts, 0.02);
    let base_right = percentile(&rights, 0.98);
    if base_left >= base_right {
        return Err(Error::DegenerateBase(format!(
            "base percentiles collapse: [{base_left}, {base_right}]"
        )));
    }
    let base_y = h - 1;

    // Per-row prefix sums of the mask make each candidate's IoU O(h).
    let mut prefix = vec![0u32; h * (w + 1)];
    for y in 0..h {
        let row = &mut prefix[y * (w + 1)..(y + 1) * (w + 1)];
        for x in 0..w {
            row[x + 1] = row[x] + snow.get(x, y) as u32;
        }
    }
    let score = |ax: usize, ay: usize| -> f64 {
        let mut inter = 0u64;
        let mut raster = 0u64;
        for y in ay..=base_y {
            if let Some((xl, xr)) = row_span(
                ax as f64, ay as f64, base_left, base_right, base_y, y, w,
            ) {
                raster += (xr - xl + 1) as u64;
                let row = &prefix[y * (w + 1)..(y + 1) * (w + 1)];
                inter += (row[xr + 1] - row[xl]) as u64;
            }
        }
        let union = total as u64 + raster - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    };

    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for ay in (0..band_top).step_by(COARSE_STRIDE) {
        for ax in (0..w).step_by(COARSE_STRIDE) {
            let s = score(ax, ay);
            if s > best.0 {
                best = (s, ay, ax);
            }
        }
    }
    let (_, cy, cx) = best;
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for ay in cy.saturating_sub(COARSE_STRIDE)..=(cy + COARSE_STRIDE).min(band_top - 1) {
        for ax in cx.saturating_sub(COARSE_STRIDE)..=(cx + COARSE_STRIDE).min(w - 1) {
            let s = score(ax, ay);
            if s > best.0 {
                best = (s, ay, ax);
            }
        }
    }

    Ok(Triangle {
        apex_x: best.2 as f64,
        apex_y: best.1 as f64,
        base_left,
        base_right,
        base_y,
    })
}

/// Road pixels = snow mask restricted to the triangle raster.
pub fn extract_road(snow: &BinaryMask, t: &Triangle) -> RoadRegion {
    let raster = rasterize_triangle(t, snow.width(), snow.height());
    let bits = snow
        .bits()
        .iter()
        .zip(raster.bits())
        .map(|(&s, &r)| s && r)
        .collect();
    let mask = BinaryMask::from_bits(snow.width(), snow.height(), bits).unwrap();
    RoadRegion { triangle: *t, mask }
}

/// Drivable-width gate: a fitted base narrower than `min_frac` of the
/// image width is not a usable road.
pub fn check_min_base_width(t: &Triangle, image_width: usize, min_frac: f64) -> Result<()> {
    let width_px = (t.base_right - t.base_left + 1) as f64;
    if width_px < min_frac * image_width as f64 {
        return Err(Error::NoRoadDetected(format!(
            "fitted base width {width_px} px below {min_frac} of image width {image_width}"
        )));
    }
    Ok(())
}
