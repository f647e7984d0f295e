use super::config::{MaskOptions, SynthConfig};
use super::params::{derive_sample_seed, sample_params_from_seed, FlareParams, SampleParams};
use crate::error::{Error, Result};
use crate::imgcore::{clamp01, gaussian_blur, to_encoded, to_linear, translate, Gamma, Image, Shape};
use crate::regionmask::{extract_light_mask, flare_mask_from_flare_image, MaskRole, RegionMask};

/// One flare image with optional per-component annotation images.
#[derive(Debug, Clone, PartialEq)]
pub struct FlareAsset {
    pub flare: Image,
    pub light: Option<Image>,
    pub glare: Option<Image>,
    pub streak: Option<Image>,
}

impl FlareAsset {
    pub fn new(flare: Image) -> Self {
        Self {
            flare,
            light: None,
            glare: None,
            streak: None,
        }
    }
}

impl From<Image> for FlareAsset {
    fn from(flare: Image) -> Self {
        FlareAsset::new(flare)
    }
}

/// One synthesized training pair plus its flare layer and annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePair {
    pub corrupted: Image,
    pub clean: Image,
    pub flare: Image,
    pub light_mask: RegionMask,
    pub glare_mask: RegionMask,
    pub streak_mask: RegionMask,
    pub sample_seed: u64,
    pub params: SampleParams,
}


fn gamma(theta: f64) -> Result<Gamma> {
    Gamma::new(theta)
}

/// `Σ gainᵢ · shift(flareᵢ, dxᵢ, dyᵢ)`, left unclamped. The inputs are
/// expected to be linear and already blurred. No flares gives zeros of `shape`.
pub fn compose_flares(flares: &[Image], placements: &[FlareParams], shape: Shape) -> Result<Image> {
    if flares.len() != placements.len() {
        return Err(Error::shape(
            format!("{} flare placements", flares.len()),
            format!("{} flare placements", placements.len()),
        ));
    }
    let mut acc = Image::zeros(shape.height, shape.width, shape.channels);
    for (f, p) in flares.iter().zip(placements) {
        acc.accumulate(&translate(f, p.dx, p.dy), p.gain as f32)?;
    }
    Ok(acc)
}

/// Linearize and blur one layer with its flare's parameters.
fn prepare_layer(img: &Image, p: &FlareParams, tint: Option<[f32; 3]>) -> Result<Image> {
    let mut lin = to_linear(img, gamma(p.theta)?);
    if let Some(t) = tint {
        if t != [1.0; 3] {
            lin = lin.scale_channels(t);
        }
    }
    gaussian_blur(&lin, p.kernel_size)
}

/// Sums one annotation class across the flares that carry it. `None` when
/// no flare has that annotation.
fn annotation_layer(
    flares: &[FlareAsset],
    params: &SampleParams,
    pick: impl Fn(&FlareAsset) -> Option<&Image>,
) -> Result<Option<Image>> {
    let mut acc: Option<Image> = None;
    for (asset, p) in flares.iter().zip(&params.flares) {
        let Some(layer) = pick(asset) else { continue };
        let moved = translate(&prepare_layer(layer, p, None)?, p.dx, p.dy);
        match acc.as_mut() {
            Some(a) => a.accumulate(&moved, p.gain as f32)?,
            None => acc = Some(moved.map(|v| v * p.gain as f32)),
        }
    }
    Ok(acc)
}

fn annotation_mask(
    flares: &[FlareAsset],
    params: &SampleParams,
    out_gamma: Gamma,
    tau: f32,
    role: MaskRole,
    pick: impl Fn(&FlareAsset) -> Option<&Image>,
) -> Result<Option<RegionMask>> {
    Ok(annotation_layer(flares, params, pick)?
        .map(|layer| flare_mask_from_flare_image(&to_encoded(&clamp01(&layer), out_gamma), tau).with_role(role)))
}

/// Synthesizes a pair from fully specified parameters.
///
/// Masks come from the flares' annotation layers when present (transformed
/// exactly like their flare, then thresholded at `flare_tau`). Without
/// annotations the light mask is the saturated region of the corrupted
/// image, the glare mask is the whole flare region and the streak mask is
/// empty.
pub fn synthesize_pair_with_params(
    background: &Image,
    flares: &[FlareAsset],
    params: &SampleParams,
    masks: &MaskOptions,
) -> Result<SamplePair> {
    if flares.len() != params.flares.len() {
        return Err(Error::parameter(format!(
            "{} flares supplied for {} parameter sets",
            flares.len(),
            params.flares.len()
        )));
    }
    let shape = background.shape();
    for asset in flares {
        asset.flare.check_same_shape(background)?;
        for layer in [&asset.light, &asset.glare, &asset.streak].into_iter().flatten() {
            if layer.height() != shape.height || layer.width() != shape.width {
                return Err(Error::shape(shape, layer.shape()));
            }
        }
    }

    let out_gamma = gamma(params.theta_output)?;
    let bg_linear = clamp01(&to_linear(background, gamma(params.theta_background)?));

    let prepared = flares
        .iter()
        .zip(&params.flares)
        .map(|(asset, p)| prepare_layer(&asset.flare, p, Some(p.tint)))
        .collect::<Result<Vec<_>>>()?;
    let combined = compose_flares(&prepared, &params.flares, shape)?;

    let mut sum = bg_linear.clone();
    sum.accumulate(&combined, 1.0)?;
    let corrupted = to_encoded(&clamp01(&sum), out_gamma);
    let clean = to_encoded(&bg_linear, out_gamma);
    let flare = to_encoded(&clamp01(&combined), out_gamma);

    let (h, w) = (shape.height, shape.width);
    let light_mask = match annotation_mask(flares, params, out_gamma, masks.flare_tau, MaskRole::LightSource, |a| a.light.as_ref())? {
        Some(m) => m,
        None => extract_light_mask(&corrupted, masks.light_threshold, masks.se_radius)?,
    };
    let glare_mask = match annotation_mask(flares, params, out_gamma, masks.flare_tau, MaskRole::Glare, |a| a.glare.as_ref())? {
        Some(m) => m,
        None => flare_mask_from_flare_image(&flare, masks.flare_tau).with_role(MaskRole::Glare),
    };
    let streak_mask = annotation_mask(flares, params, out_gamma, masks.flare_tau, MaskRole::Streak, |a| a.streak.as_ref())?
        .unwrap_or_else(|| RegionMask::empty(h, w, MaskRole::Streak));

    Ok(SamplePair {
        corrupted,
        clean,
        flare,
        light_mask,
        glare_mask,
        streak_mask,
        sample_seed: params.sample_seed,
        params: params.clone(),
    })
}

/// Synthesizes sample `index`, using every supplied flare.
pub fn synthesize_pair(
    background: &Image,
    flares: &[FlareAsset],
    config: &SynthConfig,
    index: u64,
) -> Result<SamplePair> {
    config.validate()?;
    let sample_seed = derive_sample_seed(config.seed, index);
    let params = sample_params_from_seed(
        config,
        sample_seed,
        background.height(),
        background.width(),
        Some(flares.len()),
    );
    synthesize_pair_with_params(background, flares, &params, &config.masks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::config::CountRule;

    fn background() -> Image {
        Image::from_fn(24, 32, 3, |y, x, c| ((y * 5 + x * 3 + c * 7) % 17) as f32 / 20.0)
    }

    fn flare() -> Image {
        Image::from_fn(24, 32, 3, |y, x, _| {
            let d = ((y as f32 - 12.0).powi(2) + (x as f32 - 16.0).powi(2)).sqrt();
            (1.0 - d / 10.0).max(0.0)
        })
    }

    fn identity_config() -> SynthConfig {
        SynthConfig {
            gamma_range: (1.0, 1.0),
            blur_kernel_range: (1, 1),
            gain_range: (1.0, 1.0),
            offset_fraction: 0.0,
            count_rule: CountRule::Fixed,
            flare_count: 1,
            color_jitter: false,
            ..Default::default()
        }
    }

    #[test]
    fn compose_cases() {
        let shape = Shape {
            height: 4,
            width: 4,
            channels: 3,
        };
        assert_eq!(compose_flares(&[], &[], shape).unwrap(), Image::zeros(4, 4, 3));
        let p = |gain| FlareParams {
            theta: 1.0,
            kernel_size: 1,
            gain,
            dx: 0,
            dy: 0,
            tint: [1.0; 3],
        };
        let f = Image::filled(4, 4, 3, 0.5);
        assert_eq!(compose_flares(&[f.clone()], &[p(1.0)], shape).unwrap(), f);
        let two = compose_flares(&[f.clone(), f.clone()], &[p(0.8), p(0.9)], shape).unwrap();
        assert!(two.as_slice().iter().all(|&v| (v - 0.85).abs() < 1e-6));
    }

    #[test]
    fn zero_flare_gives_identical_pair() {
        let bg = background();
        let z = FlareAsset::new(Image::zeros(24, 32, 3));
        let pair = synthesize_pair(&bg, &[z.clone(), z], &SynthConfig::default(), 3).unwrap();
        assert_eq!(pair.corrupted, pair.clean);
        assert!(pair.flare.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_gamma_reduces_to_addition() {
        let bg = background();
        let f = flare();
        let pair = synthesize_pair(&bg, &[f.clone().into()], &identity_config(), 0).unwrap();
        let expected = clamp01(&bg.zip_map(&f, |a, b| a + b).unwrap());
        assert_eq!(pair.corrupted, expected);
        assert_eq!(pair.clean, bg);
    }

    #[test]
    fn reproducible() {
        let bg = background();
        let flares: Vec<FlareAsset> = vec![flare().into(), flare().into()];
        let cfg = SynthConfig {
            seed: 42,
            ..Default::default()
        };
        let a = synthesize_pair(&bg, &flares, &cfg, 5).unwrap();
        let b = synthesize_pair(&bg, &flares, &cfg, 5).unwrap();
        assert_eq!(a, b);
        let again = synthesize_pair_with_params(&bg, &flares, &a.params, &cfg.masks).unwrap();
        assert_eq!(again, a);
    }

    #[test]
    fn annotation_masks_used() {
        let bg = background();
        let mut asset = FlareAsset::new(flare());
        asset.streak = Some(Image::from_fn(24, 32, 1, |y, _, _| if y == 12 { 1.0 } else { 0.0 }));
        let pair = synthesize_pair(&bg, &[asset], &identity_config(), 0).unwrap();
        assert_eq!(pair.streak_mask.support(), 32);
        assert_eq!(pair.streak_mask.role(), MaskRole::Streak);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let bg = background();
        let small = FlareAsset::new(Image::zeros(8, 8, 3));
        assert!(matches!(
            synthesize_pair(&bg, &[small], &SynthConfig::default(), 0),
            Err(Error::Shape { .. })
        ));
    }
}
