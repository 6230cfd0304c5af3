//! PNG and raw-float image files.
//!
//! The raw format is an ASCII header `MFIMG h w c\n` followed by
//! `h·w·c` little-endian `f32` samples in row-major, channel-last order.

use std::fs;
use std::io::Write;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageBuffer, RgbImage};

use super::Image;
use crate::error::{invalid, Error, Result};

pub fn load_png(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let decoded = image::open(path).map_err(|source| Error::Decode {
        path: path.to_path_buf(),
        source,
    })?;
    from_dynamic(decoded)
}

pub(crate) fn from_dynamic(decoded: DynamicImage) -> Result<Image> {
    match decoded {
        DynamicImage::ImageLuma8(g) => {
            let (w, h) = g.dimensions();
            let data = g.into_raw().into_iter().map(|v| v as f32 / 255.0).collect();
            Image::new(h as usize, w as usize, 1, data)
        }
        other => {
            let rgb = other.to_rgb8();
            let (w, h) = rgb.dimensions();
            let data = rgb.into_raw().into_iter().map(|v| v as f32 / 255.0).collect();
            Image::new(h as usize, w as usize, 3, data)
        }
    }
}

/// Quantizes to 8 bits with rounding.
pub fn to_bytes(image: &Image) -> Vec<u8> {
    image
        .data()
        .iter()
        .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect()
}

pub fn save_png(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (image.width() as u32, image.height() as u32);
    let bytes = to_bytes(image);
    let result = if image.channels() == 1 {
        let buf: GrayImage = ImageBuffer::from_raw(w, h, bytes).expect("buffer size");
        buf.save(path)
    } else {
        let buf: RgbImage = ImageBuffer::from_raw(w, h, bytes).expect("buffer size");
        buf.save(path)
    };
    result.map_err(|e| match e {
        image::ImageError::IoError(io) => Error::Io(io),
        source => Error::Decode {
            path: path.to_path_buf(),
            source,
        },
    })
}

/// Loads an 8-bit single-channel label mask without normalization.
pub fn load_label_mask(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<u8>)> {
    let path = path.as_ref();
    let decoded = image::open(path).map_err(|source| Error::Decode {
        path: path.to_path_buf(),
        source,
    })?;
    let gray = decoded.to_luma8();
    let (w, h) = gray.dimensions();
    Ok((h as usize, w as usize, gray.into_raw()))
}

pub fn save_label_mask(height: usize, width: usize, labels: &[u8], path: impl AsRef<Path>) -> Result<()> {
    let buf: GrayImage =
        ImageBuffer::from_raw(width as u32, height as u32, labels.to_vec()).ok_or_else(|| invalid("label buffer size"))?;
    buf.save(path.as_ref()).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::Io(io),
        source => Error::Decode {
            path: path.as_ref().to_path_buf(),
            source,
        },
    })
}

pub fn encode_raw(image: &Image) -> Vec<u8> {
    let mut out = format!("MFIMG {} {} {}\n", image.height(), image.width(), image.channels()).into_bytes();
    out.reserve(image.data().len() * 4);
    for v in image.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_raw(bytes: &[u8]) -> Result<Image> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| invalid("raw image header missing newline"))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| invalid("raw image header not ASCII"))?;
    let mut parts = header.split_ascii_whitespace();
    if parts.next() != Some("MFIMG") {
        return Err(invalid("raw image bad magic"));
    }
    let mut dim = || -> Result<usize> {
        parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| invalid("raw image header malformed"))
    };
    let (h, w, c) = (dim()?, dim()?, dim()?);
    let body = &bytes[nl + 1..];
    if body.len() != h * w * c * 4 {
        return Err(invalid(format!(
            "raw image body has {} bytes, expected {}",
            body.len(),
            h * w * c * 4
        )));
    }
    let data = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    Image::new(h, w, c, data)
}

pub fn save_raw(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_raw(image))?;
    Ok(())
}

pub fn load_raw(path: impl AsRef<Path>) -> Result<Image> {
    decode_raw(&fs::read(path)?)
}

/// Loads by extension: `.raw`/`.mfimg` as raw floats, anything else as PNG.
pub fn load_any(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("raw") | Some("mfimg") => load_raw(path),
        _ => load_png(path),
    }
}
