//! Pupil detection and Pupil Iris Frame (PIF) extraction.
//!
//! The pupil is the largest 8-connected component of pixels at or below the
//! dominant dark gray level. Its bounding box yields the center and the two
//! half-extents; a square window around it, grown by two offsets, is cropped
//! and resampled to a 512×512 PIF.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{
    self, component_areas, component_bbox, crop, histogram, histogram_peak_in, label_components,
    largest_component, threshold_below, GrayImage, ImagingError, Rect,
};

/// Side of every PIF image.
pub const PIF_SIDE: usize = 512;

/// Upper gray level of the band searched for the pupil peak. The pupil is the
/// darkest dominant mode, so brighter peaks (sclera, skin) are ignored.
pub const PUPIL_DARK_LIMIT: u8 = 127;

#[derive(Debug, Error)]
pub enum IrisError {
    #[error("pupil not found")]
    PupilNotFound,
    #[error(transparent)]
    Imaging(#[from] ImagingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PupilGeometry {
    pub x_c: i64,
    pub y_c: i64,
    pub radius_1: i64,
    pub radius_2: i64,
}

impl PupilGeometry {
    pub fn radius(&self) -> i64 {
        self.radius_1.max(self.radius_2)
    }
}

/// Window growth: `offset_1` shifts the corner outwards, `offset_2` widens the side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub offset_1: i64,
    pub offset_2: i64,
}

impl WindowSpec {
    pub fn new(offset_1: i64, offset_2: i64) -> Self {
        Self { offset_1, offset_2 }
    }

    /// Published offsets for the known iris databases (case-insensitive).
    pub fn for_database(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "CASIA" => Some(Self::new(20, 40)),
            "ICE" => Some(Self::new(6, 12)),
            "MMU" => Some(Self::new(20, 40)),
            _ => None,
        }
    }
}

/// A 512×512 gray crop centred on the pupil.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PifImage(GrayImage);

impl PifImage {
    pub fn image(&self) -> &GrayImage {
        &self.0
    }

    pub fn into_image(self) -> GrayImage {
        self.0
    }
}

pub fn detect_pupil(eye: &GrayImage) -> Result<PupilGeometry, IrisError> {
    let hist = histogram(eye)?;
    let level = histogram_peak_in(&hist, 0..=PUPIL_DARK_LIMIT);
    let bw = threshold_below(eye, level);
    let labels = label_components(&bw);
    let pupil = match largest_component(&component_areas(&labels)) {
        Ok(l) => l,
        Err(ImagingError::NoComponents) => return Err(IrisError::PupilNotFound),
        Err(e) => return Err(e.into()),
    };
    let b = component_bbox(&labels, pupil)?;
    let (x_min, x_max) = (b.x_min as i64, b.x_max as i64);
    let (y_min, y_max) = (b.y_min as i64, b.y_max as i64);
    Ok(PupilGeometry {
        x_c: (x_max + x_min) / 2,
        y_c: (y_max + y_min) / 2,
        radius_1: (x_max - x_min) / 2,
        radius_2: (y_max - y_min) / 2,
    })
}

/// Crop window around the pupil.
///
/// With `swap_axes` the column origin is derived from `y_c` and the row origin
/// from `x_c`, exactly as the published window equations read; without it the
/// usual orientation is used.
pub fn window_rect(g: &PupilGeometry, w: &WindowSpec, swap_axes: bool) -> Rect {
    let r = g.radius();
    let side = 2 * r + w.offset_2;
    let (col_center, row_center) = if swap_axes { (g.y_c, g.x_c) } else { (g.x_c, g.y_c) };
    Rect::new(col_center - r - w.offset_1, row_center - r - w.offset_1, side, side)
}

pub fn extract_pif(eye: &GrayImage, w: &WindowSpec, swap_axes: bool) -> Result<PifImage, IrisError> {
    let g = detect_pupil(eye)?;
    let window = crop(eye, window_rect(&g, w, swap_axes))?;
    Ok(PifImage(imaging::resize(&window, PIF_SIDE)?))
}
