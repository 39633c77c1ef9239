//! Lossless image file I/O.
//!
//! Binary PPM (P6) and PGM (P5) with maxval 255 are the canonical formats:
//! trivially hand-writable, byte-reproducible, diffable. PNG (8-bit RGB or
//! grayscale, no alpha) is supported for real captures. Loading and saving
//! never apply color management; pixel values round-trip exactly.

use std::fs;
use std::path::Path;

use crate::buffer::{BinaryMask, GrayImage, RgbImage};
use crate::error::{Error, Result};

const PNG_MAGIC: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// Loads a P6 PPM or PNG file as an RGB image (grayscale PNG is expanded).
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    if bytes.starts_with(b"P6") {
        decode_ppm(&bytes)
    } else if bytes.starts_with(&PNG_MAGIC) {
        decode_png_rgb(&bytes)
    } else if bytes.starts_with(b"P5") {
        Err(Error::UnsupportedFormat(
            "grayscale PGM; expected a color image (use load_gray)".into(),
        ))
    } else {
        Err(Error::UnsupportedFormat(format!(
            "{}: not a P6 PPM or PNG file",
            path.display()
        )))
    }
}

/// Loads a P5 PGM or grayscale PNG file.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    if bytes.starts_with(b"P5") {
        decode_pgm(&bytes)
    } else if bytes.starts_with(&PNG_MAGIC) {
        let img = image::load_from_memory(&bytes)
            .map_err(|e| Error::CorruptData(format!("png: {e}")))?;
        let gray = img.into_luma8();
        GrayImage::from_raw(
            gray.width() as usize,
            gray.height() as usize,
            gray.into_raw(),
        )
    } else {
        Err(Error::UnsupportedFormat(format!(
            "{}: not a P5 PGM or PNG file",
            path.display()
        )))
    }
}

/// Saves an RGB image: PNG when the extension is `.png`, P6 PPM otherwise.
pub fn save_image(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if has_png_extension(path) {
        image::save_buffer(
            path,
            img.data(),
            img.width() as u32,
            img.height() as u32,
            image::ExtendedColorType::Rgb8,
        )
        .map_err(|e| Error::Io(std::io::Error::other(e)))
    } else {
        let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
        out.extend_from_slice(img.data());
        fs::write(path, out).map_err(Error::Io)
    }
}

/// Saves a grayscale image: PNG when the extension is `.png`, P5 PGM otherwise.
pub fn save_gray(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if has_png_extension(path) {
        image::save_buffer(
            path,
            img.data(),
            img.width() as u32,
            img.height() as u32,
            image::ExtendedColorType::L8,
        )
        .map_err(|e| Error::Io(std::io::Error::other(e)))
    } else {
        let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
        out.extend_from_slice(img.data());
        fs::write(path, out).map_err(Error::Io)
    }
}

/// Saves a mask as P5 PGM with samples 0 / 255, editable in any image tool.
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let data = mask
        .bits()
        .iter()
        .map(|&b| if b { 255 } else { 0 })
        .collect();
    let g = GrayImage::from_raw(mask.width(), mask.height(), data)
        .expect("mask dimensions are consistent by construction");
    save_gray(&g, path)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    fs::read(path).map_err(Error::Io)
}

fn has_png_extension(path: &Path) -> bool {
    path.extension()
        .map(|e| e.eq_ignore_ascii_case("png"))
        .unwrap_or(false)
}

fn decode_png_rgb(bytes: &[u8]) -> Result<RgbImage> {
    let img = image::load_from_memory(bytes).map_err(|e| Error::CorruptData(format!("png: {e}")))?;
    match img {
        image::DynamicImage::ImageRgb8(rgb) => RgbImage::from_raw(
            rgb.width() as usize,
            rgb.height() as usize,
            rgb.into_raw(),
        ),
        image::DynamicImage::ImageLuma8(gray) => {
            let (w, h) = (gray.width() as usize, gray.height() as usize);
            let mut data = Vec::with_capacity(w * h * 3);
            for &v in gray.as_raw() {
                data.extend_from_slice(&[v, v, v]);
            }
            RgbImage::from_raw(w, h, data)
        }
        other => Err(Error::UnsupportedFormat(format!(
            "png color type {:?}; expected 8-bit RGB or grayscale",
            other.color()
        ))),
    }
}

/// Netpbm header: magic, then three whitespace-separated decimal fields
/// (width, height, maxval), with `#` comments allowed between tokens, then
/// exactly one whitespace byte before the binary payload.
struct PnmHeader {
    width: usize,
    height: usize,
    payload_start: usize,
}

fn parse_pnm_header(bytes: &[u8], magic: &str) -> Result<PnmHeader> {
    let mut pos = magic.len();
    let mut fields = [0usize; 3];
    for field in &mut fields {
        pos = skip_pnm_separators(bytes, pos)?;
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == start {
            return Err(Error::CorruptData(format!("{magic}: malformed header")));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("digits are ascii");
        *field = text
            .parse()
            .map_err(|_| Error::CorruptData(format!("{magic}: header field overflow")))?;
    }
    // Exactly one whitespace byte separates the maxval from the payload.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::CorruptData(format!("{magic}: truncated header")));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::CorruptData(format!("{magic}: zero dimension")));
    }
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "{magic}: maxval {maxval}, only 255 supported"
        )));
    }
    Ok(PnmHeader {
        width,
        height,
        payload_start: pos,
    })
}

fn skip_pnm_separators(bytes: &[u8], mut pos: usize) -> Result<usize> {
    loop {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else {
            return Ok(pos);
        }
    }
}

fn decode_ppm(bytes: &[u8]) -> Result<RgbImage> {
    let header = parse_pnm_header(bytes, "P6")?;
    let expected = header
        .width
        .checked_mul(header.height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::CorruptData("P6: dimensions overflow".into()))?;
    let payload = &bytes[header.payload_start..];
    if payload.len() < expected {
        return Err(Error::CorruptData(format!(
            "P6: payload {} bytes, header declares {}",
            payload.len(),
            expected
        )));
    }
    if payload.len() > expected {
        return Err(Error::CorruptData("P6: trailing bytes after payload".into()));
    }
    RgbImage::from_raw(header.width, header.height, payload.to_vec())
}

fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let header = parse_pnm_header(bytes, "P5")?;
    let expected = header
        .width
        .checked_mul(header.height)
        .ok_or_else(|| Error::CorruptData("P5: dimensions overflow".into()))?;
    let payload = &bytes[header.payload_start..];
    if payload.len() < expected {
        return Err(Error::CorruptData(format!(
            "P5: payload {} bytes, header declares {}",
            payload.len(),
            expected
        )));
    }
    if payload.len() > expected {
        return Err(Error::CorruptData("P5: trailing bytes after payload".into()));
    }
    GrayImage::from_raw(header.width, header.height, payload.to_vec())
}
