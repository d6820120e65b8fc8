use super::{histogram, BinaryImage, GrayImage, Result};

/// Otsu threshold: the level `t` maximising between-class variance for the
/// split `{g <= t}` / `{g > t}`. Ties go to the lowest level. `None` when no
/// split separates anything (a single-level image).
pub fn otsu_threshold(img: &GrayImage) -> Result<Option<u8>> {
    let h = histogram(img)?;
    let total: u64 = h.total();
    let sum: u128 = h.counts.iter().enumerate().map(|(g, &c)| g as u128 * c as u128).sum();

    let mut n0: u64 = 0;
    let mut s0: u128 = 0;
    let mut best: Option<(u8, f64)> = None;
    for t in 0..255usize {
        n0 += h.counts[t];
        s0 += t as u128 * h.counts[t] as u128;
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        // N^2 * sigma_B^2 * n0 * n1 / N^2 reduces to (s0 N - S n0)^2 / (n0 n1).
        let score = between_class_score(n0, n1, s0, total, sum);
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((t as u8, score));
        }
    }
    Ok(best.filter(|&(_, s)| s > 0.0).map(|(t, _)| t))
}

pub(crate) fn between_class_score(n0: u64, n1: u64, s0: u128, total: u64, sum: u128) -> f64 {
    let diff = s0 as i128 * total as i128 - sum as i128 * n0 as i128;
    let d = diff as f64;
    d * d / (n0 as f64 * n1 as f64)
}

/// Ink (1) where the pixel is at or below the Otsu level. A single-level
/// image has no ink.
pub fn otsu_binarize(img: &GrayImage) -> Result<BinaryImage> {
    Ok(match otsu_threshold(img)? {
        Some(t) => super::threshold_below(img, t),
        None => BinaryImage::zeros(img.width(), img.height()),
    })
}
