use super::{BinaryImage, GrayImage, ImagingError, Result};

/// Source sample positions for one output axis: `(lo, hi, weight_of_hi)`.
fn bilinear_taps(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|d| {
            let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let lo = s.floor() as usize;
            let hi = (lo + 1).min(src - 1);
            (lo, hi, s - lo as f64)
        })
        .collect()
}

/// Bilinear resampling to a `target`×`target` square, pixel centres aligned.
pub fn resize(img: &GrayImage, target: usize) -> Result<GrayImage> {
    if img.is_empty() {
        return Err(ImagingError::EmptyInput);
    }
    if target == 0 {
        return Err(ImagingError::InvalidDimensions { width: 0, height: 0 });
    }
    let xs = bilinear_taps(img.width(), target);
    let ys = bilinear_taps(img.height(), target);
    let mut data = Vec::with_capacity(target * target);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let top = img.get(x0, y0) as f64 * (1.0 - fx) + img.get(x1, y0) as f64 * fx;
            let bottom = img.get(x0, y1) as f64 * (1.0 - fx) + img.get(x1, y1) as f64 * fx;
            let v = top * (1.0 - fy) + bottom * fy;
            data.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(target, target, data)
}

fn nearest_index(d: usize, src: usize, dst: usize) -> usize {
    if dst == 1 {
        return 0;
    }
    // round(d * (src - 1) / (dst - 1)), half up, in integers.
    (2 * d * (src - 1) + (dst - 1)) / (2 * (dst - 1))
}

/// Nearest-neighbour resampling of a binary raster to `target`×`target`.
/// The first and last rows and columns of the source map onto the first and
/// last of the output, so a foreground bounding box touching the source
/// borders also touches the output borders.
pub fn resize_nearest(img: &BinaryImage, target: usize) -> Result<BinaryImage> {
    if img.width() == 0 || img.height() == 0 {
        return Err(ImagingError::EmptyInput);
    }
    if target == 0 {
        return Err(ImagingError::InvalidDimensions { width: 0, height: 0 });
    }
    let xs: Vec<usize> = (0..target).map(|d| nearest_index(d, img.width(), target)).collect();
    let ys: Vec<usize> = (0..target).map(|d| nearest_index(d, img.height(), target)).collect();
    let mut data = Vec::with_capacity(target * target);
    for &sy in &ys {
        for &sx in &xs {
            data.push(u8::from(img.get(sx, sy)));
        }
    }
    BinaryImage::new(target, target, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_stays_uniform() {
        for (w, h, t) in [(3, 7, 16), (100, 40, 512), (9, 9, 2)] {
            let out = resize(&GrayImage::filled(w, h, 137), t).unwrap();
            assert_eq!((out.width(), out.height()), (t, t));
            assert!(out.data().iter().all(|&v| v == 137));
        }
    }

    #[test]
    fn same_size_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let img = GrayImage::from_fn(512, 512, |_, _| rng.gen());
        assert_eq!(resize(&img, 512).unwrap(), img);
    }

    #[test]
    fn checkerboard_upsample_matches_closed_form() {
        let img = GrayImage::new(2, 2, vec![0, 255, 255, 0]).unwrap();
        let out = resize(&img, 4).unwrap();
        // Output centres map to source coordinates 0, 0.25, 0.75, 1 on each axis.
        let pos = [0.0, 0.25, 0.75, 1.0];
        for (y, &fy) in pos.iter().enumerate() {
            for (x, &fx) in pos.iter().enumerate() {
                let f: f64 = 255.0 * (fx * (1.0 - fy) + fy * (1.0 - fx));
                assert_eq!(out.get(x, y), f.round() as u8, "at ({x},{y})");
            }
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(resize(&GrayImage::filled(2, 2, 0), 0).is_err());
        assert!(resize(&GrayImage::new(0, 0, vec![]).unwrap(), 4).is_err());
        assert!(resize_nearest(&BinaryImage::zeros(2, 2), 0).is_err());
    }

    #[test]
    fn nearest_keeps_border_pixels() {
        for (w, h) in [(3, 5), (700, 300), (1200, 2)] {
            let mut bw = BinaryImage::zeros(w, h);
            bw.set(0, 0, true);
            bw.set(w - 1, h - 1, true);
            let out = resize_nearest(&bw, 512).unwrap();
            assert!(out.get(0, 0));
            assert!(out.get(511, 511));
        }
    }

    #[test]
    fn nearest_same_size_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let bw = BinaryImage::from_fn(64, 64, |_, _| rng.gen_bool(0.5));
        assert_eq!(resize_nearest(&bw, 64).unwrap(), bw);
    }
}
