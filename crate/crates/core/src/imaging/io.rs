use std::fs;
use std::io::Write;
use std::path::Path;

use super::{BinaryImage, ColorImage, GrayImage, ImagingError, Result};

/// A decoded image file, before any pipeline-specific conversion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadedImage {
    Gray(GrayImage),
    Color(ColorImage),
}

impl LoadedImage {
    pub fn into_gray(self) -> Result<GrayImage> {
        match self {
            LoadedImage::Gray(g) => Ok(g),
            LoadedImage::Color(c) => super::to_gray(&c),
        }
    }
}

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Decodes a binary PGM (P5, maxval 255) or an 8-bit gray/RGB PNG.
pub fn read_image(path: &Path) -> Result<LoadedImage> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(b"P5") {
        parse_pgm(&bytes).map(LoadedImage::Gray)
    } else if bytes.starts_with(PNG_MAGIC) {
        decode_png(&bytes)
    } else {
        Err(ImagingError::Format("expected binary PGM (P5) or PNG".into()))
    }
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    parse_pgm(&fs::read(path)?)
}

fn decode_png(bytes: &[u8]) -> Result<LoadedImage> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| ImagingError::Format(e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        image::DynamicImage::ImageLuma8(buf) => GrayImage::new(w, h, buf.into_raw()).map(LoadedImage::Gray),
        image::DynamicImage::ImageRgb8(buf) => {
            ColorImage::new(w, h, 3, buf.into_raw()).map(LoadedImage::Color)
        }
        other => Err(ImagingError::Format(format!(
            "unsupported PNG layout {:?}; only 8-bit gray or RGB",
            other.color()
        ))),
    }
}

fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // Skip whitespace and comment lines between header tokens.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImagingError::Format("malformed PGM header".into()))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(ImagingError::Format(format!(
            "unsupported PGM maxval {maxval}; only 8-bit (255) is accepted"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(ImagingError::Format("malformed PGM header".into()));
    }
    pos += 1;
    let raster = bytes
        .get(pos..pos + width * height)
        .ok_or_else(|| ImagingError::Format("truncated PGM raster".into()))?;
    GrayImage::new(width, height, raster.to_vec())
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    write!(f, "P5\n{} {}\n255\n", img.width(), img.height())?;
    f.write_all(img.data())?;
    f.flush()?;
    Ok(())
}

/// Writes a binary raster as a PGM with ink black on white.
pub fn write_pgm_binary(path: &Path, img: &BinaryImage) -> Result<()> {
    write_pgm(path, &img.to_gray_ink())
}
