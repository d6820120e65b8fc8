//! Offline signature normalisation: binarise, crop to the ink bounding box,
//! and stretch to a 512×512 binary frame.

use thiserror::Error;

use crate::imaging::{
    crop_binary, otsu_binarize, resize_nearest, BinaryImage, ImagingError, LoadedImage, Rect,
};

pub const SIGNATURE_SIDE: usize = 512;

#[derive(Debug, Error)]
pub enum SignatureError {
    #[error("blank signature")]
    Blank,
    #[error(transparent)]
    Imaging(#[from] ImagingError),
}

/// 512×512 binary signature whose ink bounding box spans the whole frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedSignature(BinaryImage);

impl NormalizedSignature {
    pub fn image(&self) -> &BinaryImage {
        &self.0
    }

    pub fn into_image(self) -> BinaryImage {
        self.0
    }
}

pub fn preprocess_signature(img: LoadedImage) -> Result<NormalizedSignature, SignatureError> {
    let gray = img.into_gray()?;
    if gray.is_empty() {
        return Err(ImagingError::EmptyInput.into());
    }
    normalize_ink(&otsu_binarize(&gray)?)
}

/// Bounding-box crop and nearest-neighbour stretch of an already binarised page.
pub fn normalize_ink(ink: &BinaryImage) -> Result<NormalizedSignature, SignatureError> {
    let bbox = ink.foreground_bbox().ok_or(SignatureError::Blank)?;
    let rect = Rect::new(
        bbox.x_min as i64,
        bbox.y_min as i64,
        bbox.width() as i64,
        bbox.height() as i64,
    );
    let cropped = crop_binary(ink, rect)?;
    Ok(NormalizedSignature(resize_nearest(&cropped, SIGNATURE_SIDE)?))
}
