//! Grey-level erosion and dilation by a square structuring element.
//!
//! Windows are clipped to the image, so out-of-bounds pixels never take
//! part. On binary masks this is the usual set morphology restricted to the
//! image domain, and the resulting opening is idempotent and anti-extensive.

use super::RegionMask;

fn sliding(
    src: &[f32],
    h: usize,
    w: usize,
    radius: usize,
    pick: fn(f32, f32) -> f32,
) -> Vec<f32> {
    let mut tmp = vec![0.0f32; h * w];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let lo = x.saturating_sub(radius);
            let hi = (x + radius).min(w - 1);
            tmp[y * w + x] = row[lo + 1..=hi].iter().fold(row[lo], |a, &b| pick(a, b));
        }
    }
    let mut out = vec![0.0f32; h * w];
    for y in 0..h {
        let lo = y.saturating_sub(radius);
        let hi = (y + radius).min(h - 1);
        for x in 0..w {
            let mut acc = tmp[lo * w + x];
            for yy in lo + 1..=hi {
                acc = pick(acc, tmp[yy * w + x]);
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Minimum over the `(2r+1)×(2r+1)` neighbourhood.
pub fn erode(mask: &RegionMask, radius: usize) -> RegionMask {
    if radius == 0 {
        return mask.clone();
    }
    let weights = sliding(mask.weights(), mask.height(), mask.width(), radius, f32::min);
    RegionMask::from_parts(mask.height(), mask.width(), mask.role(), weights)
}

/// Maximum over the `(2r+1)×(2r+1)` neighbourhood.
pub fn dilate(mask: &RegionMask, radius: usize) -> RegionMask {
    if radius == 0 {
        return mask.clone();
    }
    let weights = sliding(mask.weights(), mask.height(), mask.width(), radius, f32::max);
    RegionMask::from_parts(mask.height(), mask.width(), mask.role(), weights)
}

/// Erosion followed by dilation.
pub fn opening(mask: &RegionMask, radius: usize) -> RegionMask {
    dilate(&erode(mask, radius), radius)
}
