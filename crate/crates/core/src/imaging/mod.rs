//! Raster primitives shared by the iris and signature pipelines.
//!
//! Images are row-major and immutable once built. [`GrayImage`] carries 8-bit
//! intensities, [`BinaryImage`] carries `{0, 1}` values with 1 as foreground.

mod io;
mod label;
mod otsu;
mod resize;

pub use io::{read_image, read_pgm, write_pgm, write_pgm_binary, LoadedImage};
pub use label::{
    component_areas, component_bbox, label_components, largest_component, BoundingBox, LabelMap,
};
pub use otsu::{otsu_binarize, otsu_threshold};
pub use resize::{resize, resize_nearest};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("empty input")]
    EmptyInput,
    #[error("no components")]
    NoComponents,
    #[error("unknown label {0}")]
    UnknownLabel(u32),
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: i64, height: i64 },
    #[error("data length {len} does not match {width}x{height}")]
    LengthMismatch { width: usize, height: usize, len: usize },
    #[error("binary pixel value {0} is not 0 or 1")]
    NotBinary(u8),
    #[error("expected 3 channels, got {0}")]
    ChannelCount(usize),
    #[error("unsupported image format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ImagingError>;

/// 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(ImagingError::LengthMismatch { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self { width, height, data: vec![value; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Pixel at column `x`, row `y`.
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }
}

/// Two-level raster, 1 = foreground.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(ImagingError::LengthMismatch { width, height, len: data.len() });
        }
        if let Some(&bad) = data.iter().find(|&&v| v > 1) {
            return Err(ImagingError::NotBinary(bad));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![0; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(u8::from(f(x, y)));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] == 1
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = u8::from(v);
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v == 1).count()
    }

    /// Tight bounding box of all foreground pixels, `None` when there are none.
    pub fn foreground_bbox(&self) -> Option<BoundingBox> {
        let mut bbox: Option<BoundingBox> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    match bbox.as_mut() {
                        Some(b) => b.include(x, y),
                        None => bbox = Some(BoundingBox::point(x, y)),
                    }
                }
            }
        }
        bbox
    }

    /// Gray rendering with foreground as black (0) on white (255).
    pub fn to_gray_ink(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| if v == 1 { 0 } else { 255 }).collect(),
        }
    }
}

/// Interleaved 8-bit color raster, `channels` samples per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorImage {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

impl ColorImage {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * channels {
            return Err(ImagingError::LengthMismatch { width, height, len: data.len() });
        }
        Ok(Self { width, height, channels, data })
    }
}

/// Pixel counts per gray level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub counts: [u64; 256],
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Axis-aligned window, possibly extending past the image frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: i64,
    pub y: i64,
    pub width: i64,
    pub height: i64,
}

impl Rect {
    pub fn new(x: i64, y: i64, width: i64, height: i64) -> Self {
        Self { x, y, width, height }
    }
}

pub fn histogram(img: &GrayImage) -> Result<Histogram> {
    if img.is_empty() {
        return Err(ImagingError::EmptyInput);
    }
    let mut counts = [0u64; 256];
    for &v in img.data() {
        counts[v as usize] += 1;
    }
    Ok(Histogram { counts })
}

/// Gray level with the largest count; ties go to the lowest level.
pub fn histogram_peak(h: &Histogram) -> u8 {
    histogram_peak_in(h, 0..=255)
}

/// Like [`histogram_peak`], restricted to the levels in `levels`.
pub fn histogram_peak_in(h: &Histogram, levels: std::ops::RangeInclusive<u8>) -> u8 {
    let mut best = *levels.start();
    let mut best_count = h.counts[best as usize];
    for g in levels {
        if h.counts[g as usize] > best_count {
            best = g;
            best_count = h.counts[g as usize];
        }
    }
    best
}

/// Foreground where intensity is at most `level`.
pub fn threshold_below(img: &GrayImage, level: u8) -> BinaryImage {
    BinaryImage {
        width: img.width,
        height: img.height,
        data: img.data.iter().map(|&v| u8::from(v <= level)).collect(),
    }
}

fn check_size(width: i64, height: i64) -> Result<(usize, usize)> {
    if width <= 0 || height <= 0 {
        return Err(ImagingError::InvalidDimensions { width, height });
    }
    Ok((width as usize, height as usize))
}

/// Copies `rect` out of `img`; pixels outside the frame read as 0.
pub fn crop(img: &GrayImage, rect: Rect) -> Result<GrayImage> {
    let (w, h) = check_size(rect.width, rect.height)?;
    let mut out = vec![0u8; w * h];
    copy_window(img.width, img.height, img.data(), rect, &mut out);
    Ok(GrayImage { width: w, height: h, data: out })
}

/// Binary counterpart of [`crop`].
pub fn crop_binary(img: &BinaryImage, rect: Rect) -> Result<BinaryImage> {
    let (w, h) = check_size(rect.width, rect.height)?;
    let mut out = vec![0u8; w * h];
    copy_window(img.width, img.height, img.data(), rect, &mut out);
    Ok(BinaryImage { width: w, height: h, data: out })
}

fn copy_window(src_w: usize, src_h: usize, src: &[u8], rect: Rect, out: &mut [u8]) {
    let w = rect.width as usize;
    let x0 = rect.x.max(0);
    let x1 = (rect.x + rect.width).min(src_w as i64);
    if x0 >= x1 {
        return;
    }
    for oy in 0..rect.height {
        let sy = rect.y + oy;
        if sy < 0 || sy >= src_h as i64 {
            continue;
        }
        let row = sy as usize * src_w;
        let dst = oy as usize * w + (x0 - rect.x) as usize;
        let len = (x1 - x0) as usize;
        out[dst..dst + len].copy_from_slice(&src[row + x0 as usize..row + x0 as usize + len]);
    }
}

/// BT.601 luma, rounded to nearest.
pub fn to_gray(img: &ColorImage) -> Result<GrayImage> {
    if img.channels != 3 {
        return Err(ImagingError::ChannelCount(img.channels));
    }
    let data = img
        .data
        .chunks_exact(3)
        .map(|px| {
            let y = 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64;
            y.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    Ok(GrayImage { width: img.width, height: img.height, data })
}
