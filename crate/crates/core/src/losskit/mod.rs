//! Reference loss kernels used by flare-removal training recipes.
//!
//! Every kernel is a pure function over [`Image`]s returning an `f64`.
//! Norms written as sums (`‖·‖²` over all pixels) are realized as means so
//! values do not depend on resolution; multiply by the sample count to get
//! the summed form. Perceptual terms go through a pluggable
//! [`FeatureExtractor`]; the default is [`IdentityFeatures`].

mod base;
mod composite;
mod frequency;
mod gradient;
mod weights;

use crate::error::{Error, Result};
use crate::imgcore::Image;

pub use self::base::{charbonnier, l1, mse_loss, smooth_l1};
pub use self::composite::{
    actionbrain_combine, actionbrain_loss, cevi_deflare_loss, global_regional_loss,
    global_regional_prediction, mask_loss, megfr_separation_loss, recurrent_reconstruction_loss,
    recurrent_reconstruction_terms, triplet_loss, usask_hybrid_loss, weighted_region_l1,
    RecurrentTerms,
};
pub use self::frequency::{frequency_reconstruction_loss, lvgroup_loss};
pub use self::gradient::{fdn_loss, gradient_loss, gradient_loss_sobel, sobel, GradientOperator};
pub use self::weights::{
    ActionBrainWeights, AntInsWeights, CeviWeights, LossWeights, LvGroupWeights, RecurrentWeights,
    UsaskWeights,
};

/// Maps an image to a flat feature vector for perceptual-style distances.
pub trait FeatureExtractor: Send + Sync {
    fn features(&self, img: &Image) -> Vec<f64>;
}

/// Flattens the raster as-is.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityFeatures;

impl FeatureExtractor for IdentityFeatures {
    fn features(&self, img: &Image) -> Vec<f64> {
        img.as_slice().iter().map(|&v| v as f64).collect()
    }
}

impl<F> FeatureExtractor for F
where
    F: Fn(&Image) -> Vec<f64> + Send + Sync,
{
    fn features(&self, img: &Image) -> Vec<f64> {
        self(img)
    }
}

fn check_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::shape(
            format!("{} features", a.len()),
            format!("{} features", b.len()),
        ));
    }
    Ok(())
}

/// Mean squared feature distance.
pub fn feature_mse(fx: &dyn FeatureExtractor, a: &Image, b: &Image) -> Result<f64> {
    let (fa, fb) = (fx.features(a), fx.features(b));
    check_len(&fa, &fb)?;
    if fa.is_empty() {
        return Ok(0.0);
    }
    Ok(fa.iter().zip(&fb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / fa.len() as f64)
}

/// Mean absolute feature distance.
pub fn feature_l1(fx: &dyn FeatureExtractor, a: &Image, b: &Image) -> Result<f64> {
    let (fa, fb) = (fx.features(a), fx.features(b));
    check_len(&fa, &fb)?;
    if fa.is_empty() {
        return Ok(0.0);
    }
    Ok(fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).sum::<f64>() / fa.len() as f64)
}
