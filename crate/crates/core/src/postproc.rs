//! Output conditioning: pasting the input's light source back into a
//! prediction, and mixing a prediction with its input.

use crate::error::{Error, Result};
use crate::imgcore::{composite, gaussian_blur, Image};
use crate::regionmask::{extract_light_mask, RegionMask};

/// Replaces the light-source region of `pred` with the matching pixels of
/// `input`. The region is the saturated area of `input`, cleaned by an
/// opening.
pub fn blend_back_light_source(pred: &Image, input: &Image, threshold: f32, se_radius: usize) -> Result<Image> {
    pred.check_same_shape(input)?;
    let mask = extract_light_mask(input, threshold, se_radius)?;
    composite(input, pred, &mask)
}

/// Like [`blend_back_light_source`] but with the mask edge softened by a
/// Gaussian of the given odd kernel size. The mask is first maximized with
/// the hard mask so every light-source pixel still comes from the input.
pub fn blend_back_light_source_feathered(
    pred: &Image,
    input: &Image,
    threshold: f32,
    se_radius: usize,
    feather_kernel: usize,
) -> Result<Image> {
    pred.check_same_shape(input)?;
    let hard = extract_light_mask(input, threshold, se_radius)?;
    let soft = gaussian_blur(&hard.to_image(), feather_kernel)?;
    let weights = soft
        .as_slice()
        .iter()
        .zip(hard.weights())
        .map(|(&s, &h)| s.clamp(0.0, 1.0).max(h))
        .collect();
    let mask = RegionMask::new(hard.height(), hard.width(), hard.role(), weights)?;
    composite(input, pred, &mask)
}

/// `alpha·pred + (1 − alpha)·input`.
pub fn blend_with_input(pred: &Image, input: &Image, alpha: f32) -> Result<Image> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::parameter(format!("blend alpha must lie in [0, 1], got {alpha}")));
    }
    pred.zip_map(input, |p, i| alpha * p + (1.0 - alpha) * i)
}
