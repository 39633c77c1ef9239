//! Snow / non-snow classification and binary morphology.
//!
//! Snow reads as bright and desaturated, so the classifier needs only the
//! S and V planes. Morphological opening-then-closing cleans the mask:
//! opening kills small snow specks in the bushes, closing repairs pinholes
//! in the road surface. Out-of-bounds pixels count as background for both
//! primitives, which keeps phantom foreground off the frame edge.

use crate::buffer::{BinaryMask, HsvImage};
use crate::error::{Error, Result};

/// Snow band in HSV: desaturated (S <= s_max) and bright (V >= v_min).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct SnowThresholds {
    pub s_max: u8,
    pub v_min: u8,
}

impl Default for SnowThresholds {
    fn default() -> Self {
        Self {
            s_max: 30,
            v_min: 150,
        }
    }
}

/// Rectangular structuring element with odd dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct StructuringElement {
    width: usize,
    height: usize,
}

impl StructuringElement {
    pub fn rect(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 || width % 2 == 0 || height % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "structuring element {width}x{height}: dimensions must be odd and >= 1"
            )));
        }
        Ok(Self { width, height })
    }

    /// Square element of side `2*radius + 1`.
    pub fn square(radius: usize) -> Self {
        Self {
            width: 2 * radius + 1,
            height: 2 * radius + 1,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn radii(&self) -> (isize, isize) {
        ((self.width / 2) as isize, (self.height / 2) as isize)
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        Self {
            width: 5,
            height: 5,
        }
    }
}

/// bit = (S <= s_max) AND (V >= v_min), per pixel.
pub fn classify_snow(img: &HsvImage, t: &SnowThresholds) -> BinaryMask {
    let mut out = BinaryMask::new(img.width(), img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (_, s, v) = img.pixel(x, y);
            out.set(x, y, s <= t.s_max && v >= t.v_min);
        }
    }
    out
}

// A rectangular window test factors into a horizontal pass and a vertical
// pass; both passes below treat out-of-bounds as false.

fn horizontal_all(m: &BinaryMask, rx: isize) -> BinaryMask {
    let (w, h) = (m.width(), m.height());
    let mut out = BinaryMask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut all = true;
            for dx in -rx..=rx {
                let xx = x as isize + dx;
                if xx < 0 || xx >= w as isize || !m.get(xx as usize, y) {
                    all = false;
                    break;
                }
            }
            out.set(x, y, all);
        }
    }
    out
}

fn vertical_all(m: &BinaryMask, ry: isize) -> BinaryMask {
    let (w, h) = (m.width(), m.height());
    let mut out = BinaryMask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut all = true;
            for dy in -ry..=ry {
                let yy = y as isize + dy;
                if yy < 0 || yy >= h as isize || !m.get(x, yy as usize) {
                    all = false;
                    break;
                }
            }
            out.set(x, y, all);
        }
    }
    out
}

fn horizontal_any(m: &BinaryMask, rx: isize) -> BinaryMask {
    let (w, h) = (m.width(), m.height());
    let mut out = BinaryMask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut any = false;
            for dx in -rx..=rx {
                let xx = x as isize + dx;
                if xx >= 0 && xx < w as isize && m.get(xx as usize, y) {
                    any = true;
                    break;
                }
            }
            out.set(x, y, any);
        }
    }
    out
}

fn vertical_any(m: &BinaryMask, ry: isize) -> BinaryMask {
    let (w, h) = (m.width(), m.height());
    let mut out = BinaryMask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut any = false;
            for dy in -ry..=ry {
                let yy = y as isize + dy;
                if yy >= 0 && yy < h as isize && m.get(x, yy as usize) {
                    any = true;
                    break;
                }
            }
            out.set(x, y, any);
        }
    }
    out
}

/// Output bit is true iff every bit under the element centered there is
/// true; out-of-bounds counts as false.
pub fn erode(m: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (rx, ry) = se.radii();
    vertical_all(&horizontal_all(m, rx), ry)
}

/// Output bit is true iff any bit under the element centered there is
/// true; out-of-bounds counts as false.
pub fn dilate(m: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (rx, ry) = se.radii();
    vertical_any(&horizontal_any(m, rx), ry)
}

/// Erosion then dilation: removes foreground components too small to
/// contain a full element window.
pub fn open(m: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    dilate(&erode(m, se), se)
}

/// Dilation then erosion: fills background holes too small to contain a
/// full element window.
pub fn close(m: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    erode(&dilate(m, se), se)
}

/// Opening followed by closing with the same element.
pub fn open_close(m: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    close(&open(m, se), se)
}
