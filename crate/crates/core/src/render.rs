//! Result visualization: road tint, triangle outline, vanishing-point
//! marker.

use crate::buffer::{quantize_u8, RgbImage};
use crate::vanishing::RoadRegion;

fn blend_green(px: (u8, u8, u8)) -> (u8, u8, u8) {
    // 50% blend toward pure green.
    (
        quantize_u8(px.0 as f64 / 2.0),
        quantize_u8((px.1 as f64 + 255.0) / 2.0),
        quantize_u8(px.2 as f64 / 2.0),
    )
}

const RED: (u8, u8, u8) = (255, 0, 0);

fn draw_line(img: &mut RgbImage, from: (f64, f64), to: (f64, f64)) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let dx = to.0 - from.0;
    let dy = to.1 - from.1;
    let steps = dx.abs().max(dy.abs()).ceil().max(1.0) as usize;
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let x = (from.0 + t * dx).round() as i64;
        let y = (from.1 + t * dy).round() as i64;
        if x >= 0 && x < w && y >= 0 && y < h {
            img.set_pixel(x as usize, y as usize, RED);
        }
    }
}

fn draw_disc(img: &mut RgbImage, cx: i64, cy: i64, radius: i64) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            if dx * dx + dy * dy > radius * radius {
                continue;
            }
            let (x, y) = (cx + dx, cy + dy);
            if x >= 0 && x < w && y >= 0 && y < h {
                img.set_pixel(x as usize, y as usize, RED);
            }
        }
    }
}

/// Detection overlay: road pixels tinted green at 50%, triangle edges in
/// red, and a filled red disc of radius 4 at the vanishing point.
pub fn render_overlay(base: &RgbImage, road: &RoadRegion) -> RgbImage {
    let mut out = base.clone();
    for y in 0..base.height() {
        for x in 0..base.width() {
            if road.mask.get(x, y) {
                out.set_pixel(x, y, blend_green(base.pixel(x, y)));
            }
        }
    }
    let t = &road.triangle;
    let apex = (t.apex_x, t.apex_y);
    let bl = (t.base_left as f64, t.base_y as f64);
    let br = (t.base_right as f64, t.base_y as f64);
    draw_line(&mut out, apex, bl);
    draw_line(&mut out, apex, br);
    draw_line(&mut out, bl, br);
    let vp = t.vanishing_point();
    draw_disc(&mut out, vp.x as i64, vp.y as i64, 4);
    out
}
