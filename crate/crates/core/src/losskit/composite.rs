use super::base::{l1, mse_loss};
use super::weights::{ActionBrainWeights, CeviWeights, UsaskWeights};
use super::{check_len, feature_l1, feature_mse, FeatureExtractor};
use crate::error::{Error, Result};
use crate::imgcore::{composite, Image};
use crate::metrics::ssim;
use crate::regionmask::{mask_complement, mask_or, RegionMask};

/// Content/flare separation loss: `|Yc−Iy| + |Yf−If| + |φ(Yc)−φ(Iy)|²`.
pub fn megfr_separation_loss(
    content_pred: &Image,
    flare_pred: &Image,
    clean: &Image,
    flare: &Image,
    fx: &dyn FeatureExtractor,
) -> Result<f64> {
    Ok(l1(content_pred, clean)? + l1(flare_pred, flare)? + feature_mse(fx, content_pred, clean)?)
}

/// `max(0, ‖a−p‖² − ‖a−n‖² + margin)` with summed squared distances.
pub fn triplet_loss(anchor: &[f64], positive: &[f64], negative: &[f64], margin: f64) -> Result<f64> {
    check_len(anchor, positive)?;
    check_len(anchor, negative)?;
    if margin.is_nan() || margin < 0.0 {
        return Err(Error::parameter(format!("triplet margin must be >= 0, got {margin}")));
    }
    let dist = |u: &[f64]| -> f64 {
        anchor
            .iter()
            .zip(u)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    };
    Ok((dist(positive) - dist(negative) + margin).max(0.0))
}

pub fn actionbrain_combine(mse: f64, perceptual: f64, triplet: f64, w: &ActionBrainWeights) -> f64 {
    w.lambda * mse + w.delta * perceptual + (1.0 - w.lambda) * triplet
}

/// `λ·MSE(a,p) + δ·PL(a,p) + (1−λ)·triplet(φa, φp, φn)`.
pub fn actionbrain_loss(
    anchor: &Image,
    positive: &Image,
    negative: &Image,
    w: &ActionBrainWeights,
    fx: &dyn FeatureExtractor,
) -> Result<f64> {
    anchor.check_same_shape(positive)?;
    anchor.check_same_shape(negative)?;
    let mse = mse_loss(anchor, positive)?;
    let perceptual = feature_mse(fx, anchor, positive)?;
    let triplet = triplet_loss(
        &fx.features(anchor),
        &fx.features(positive),
        &fx.features(negative),
        w.margin,
    )?;
    Ok(actionbrain_combine(mse, perceptual, triplet, w))
}

/// The two portions of the recurrent reconstruction loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrentTerms {
    /// `Σ γₖ·(MSE + 1 − SSIM)`.
    pub weighted: f64,
    /// `Σ mean|φ(Îₖ) − φ(I_ref)|`.
    pub feature: f64,
}

impl RecurrentTerms {
    pub fn total(&self) -> f64 {
        self.weighted + self.feature
    }
}

pub fn recurrent_reconstruction_terms(
    preds: &[Image],
    reference: &Image,
    gammas: &[f64],
    fx: &dyn FeatureExtractor,
) -> Result<RecurrentTerms> {
    if preds.len() != gammas.len() {
        return Err(Error::shape(
            format!("{} step weights", preds.len()),
            format!("{} step weights", gammas.len()),
        ));
    }
    let mut terms = RecurrentTerms {
        weighted: 0.0,
        feature: 0.0,
    };
    for (pred, &g) in preds.iter().zip(gammas) {
        terms.weighted += g * (mse_loss(pred, reference)? + 1.0 - ssim(pred, reference)?);
        terms.feature += feature_l1(fx, pred, reference)?;
    }
    Ok(terms)
}

/// Recurrent reconstruction loss over `K` refinement steps.
pub fn recurrent_reconstruction_loss(
    preds: &[Image],
    reference: &Image,
    gammas: &[f64],
    fx: &dyn FeatureExtractor,
) -> Result<f64> {
    recurrent_reconstruction_terms(preds, reference, gammas, fx).map(|t| t.total())
}

fn mask_mse(a: &RegionMask, b: &RegionMask) -> Result<f64> {
    if a.height() != b.height() || a.width() != b.width() {
        return Err(Error::shape(
            format!("{}x{} mask", a.height(), a.width()),
            format!("{}x{} mask", b.height(), b.width()),
        ));
    }
    let n = a.weights().len() as f64;
    Ok(a.weights()
        .iter()
        .zip(b.weights())
        .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
        .sum::<f64>()
        / n)
}

/// `λ·Σₖ mean(M̂ₖ − (1 − Fₖ))²`.
pub fn mask_loss(pred_masks: &[RegionMask], flare_masks: &[RegionMask], lambda: f64) -> Result<f64> {
    if pred_masks.len() != flare_masks.len() {
        return Err(Error::shape(
            format!("{} masks", pred_masks.len()),
            format!("{} masks", flare_masks.len()),
        ));
    }
    let mut sum = 0.0;
    for (m, f) in pred_masks.iter().zip(flare_masks) {
        sum += mask_mse(m, &mask_complement(f))?;
    }
    Ok(lambda * sum)
}

/// Mean of `w·|pred − gt|`, with `w = inside` on flare pixels (weight > ½)
/// and `outside` elsewhere.
pub fn weighted_region_l1(
    pred: &Image,
    gt: &Image,
    flare_mask: &RegionMask,
    inside: f64,
    outside: f64,
) -> Result<f64> {
    pred.check_same_shape(gt)?;
    pred.check_mask(flare_mask)?;
    let c = pred.channels();
    let n = pred.as_slice().len() as f64;
    let sum: f64 = pred
        .as_slice()
        .iter()
        .zip(gt.as_slice())
        .enumerate()
        .map(|(i, (&p, &g))| {
            let w = if flare_mask.weights()[i / c] > 0.5 { inside } else { outside };
            w * (p as f64 - g as f64).abs()
        })
        .sum();
    Ok(sum / n)
}

/// Global and regional substitutes for the prediction:
/// `Î_g = clean⊙M_l + pred⊙(1−M_l)` and
/// `Î_r = clean⊙(M_l∨M_nf) + pred⊙(1−(M_l∨M_nf))`.
pub fn global_regional_prediction(
    pred: &Image,
    clean: &Image,
    light: &RegionMask,
    non_flare: &RegionMask,
) -> Result<(Image, Image)> {
    let global = composite(clean, pred, light)?;
    let regional = composite(clean, pred, &mask_or(light, non_flare)?)?;
    Ok((global, regional))
}

/// `w_g·base(Î_g, clean) + w_r·base(Î_r, clean)`.
pub fn global_regional_loss(
    pred: &Image,
    clean: &Image,
    light: &RegionMask,
    non_flare: &RegionMask,
    base: impl Fn(&Image, &Image) -> Result<f64>,
    global_weight: f64,
    regional_weight: f64,
) -> Result<f64> {
    let (g, r) = global_regional_prediction(pred, clean, light, non_flare)?;
    Ok(global_weight * base(&g, clean)? + regional_weight * base(&r, clean)?)
}

/// `L_smooth + α·L_per + β·L_mge + γ·L_adv`; the adversarial term comes from
/// an external discriminator.
pub fn usask_hybrid_loss(smooth: f64, perceptual: f64, mge: f64, adversarial: f64, w: &UsaskWeights) -> f64 {
    smooth + w.alpha * perceptual + w.beta * mge + w.gamma * adversarial
}

/// `α·L_flare + β·L_ls + γ·L_recon`.
pub fn cevi_deflare_loss(flare: f64, light_source: f64, recon: f64, w: &CeviWeights) -> f64 {
    w.alpha * flare + w.beta * light_source + w.gamma * recon
}
