//! Region masks: light-source detection, flare thresholding, mask algebra and
//! sigmoid attention maps.

mod morphology;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::Image;

pub use self::morphology::{dilate, erode, opening};

/// Saturation threshold used when none is given.
pub const DEFAULT_LIGHT_THRESHOLD: f32 = 0.99;
/// Structuring-element radius used when none is given (3×3 square).
pub const DEFAULT_SE_RADIUS: usize = 1;
/// Flare-presence threshold used when none is given.
pub const DEFAULT_FLARE_TAU: f32 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskRole {
    LightSource,
    Glare,
    Streak,
    Flare,
    NonFlare,
    Custom,
}

impl fmt::Display for MaskRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaskRole::LightSource => "light_source",
            MaskRole::Glare => "glare",
            MaskRole::Streak => "streak",
            MaskRole::Flare => "flare",
            MaskRole::NonFlare => "non_flare",
            MaskRole::Custom => "custom",
        })
    }
}

impl FromStr for MaskRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "light_source" => MaskRole::LightSource,
            "glare" => MaskRole::Glare,
            "streak" => MaskRole::Streak,
            "flare" => MaskRole::Flare,
            "non_flare" => MaskRole::NonFlare,
            "custom" => MaskRole::Custom,
            other => return Err(Error::parameter(format!("unknown mask role `{other}`"))),
        })
    }
}

/// An `H×W` weight map in `[0, 1]` annotating one region of an image.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    height: usize,
    width: usize,
    role: MaskRole,
    weights: Vec<f32>,
}

impl RegionMask {
    pub fn new(height: usize, width: usize, role: MaskRole, weights: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::parameter("mask extent must be at least 1x1"));
        }
        if weights.len() != height * width {
            return Err(Error::shape(
                format!("{} weights", height * width),
                format!("{} weights", weights.len()),
            ));
        }
        if let Some(bad) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::parameter(format!("mask weight {bad} outside [0, 1]")));
        }
        Ok(Self {
            height,
            width,
            role,
            weights,
        })
    }

    pub fn empty(height: usize, width: usize, role: MaskRole) -> Self {
        Self::new(height, width, role, vec![0.0; height * width]).expect("valid mask extent")
    }

    pub fn full(height: usize, width: usize, role: MaskRole) -> Self {
        Self::new(height, width, role, vec![1.0; height * width]).expect("valid mask extent")
    }

    /// Binary mask from a per-pixel predicate.
    pub fn from_predicate(
        height: usize,
        width: usize,
        role: MaskRole,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Self {
        let mut weights = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                weights.push(if f(y, x) { 1.0 } else { 0.0 });
            }
        }
        Self::new(height, width, role, weights).expect("valid mask extent")
    }

    /// Reads a single-channel image as mask weights (clipped into `[0, 1]`).
    /// Three-channel images use their first channel.
    pub fn from_image(img: &Image, role: MaskRole) -> Self {
        let c = img.channels();
        let weights = img
            .as_slice()
            .chunks_exact(c)
            .map(|px| px[0].clamp(0.0, 1.0))
            .collect();
        Self::from_parts(img.height(), img.width(), role, weights)
    }

    /// Single-channel image of the weights.
    pub fn to_image(&self) -> Image {
        Image::new(self.height, self.width, 1, self.weights.clone()).expect("mask extent valid")
    }

    pub(crate) fn from_parts(height: usize, width: usize, role: MaskRole, weights: Vec<f32>) -> Self {
        debug_assert_eq!(weights.len(), height * width);
        Self {
            height,
            width,
            role,
            weights,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn role(&self) -> MaskRole {
        self.role
    }

    pub fn with_role(mut self, role: MaskRole) -> Self {
        self.role = role;
        self
    }

    #[inline]
    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f32 {
        self.weights[y * self.width + x]
    }

    pub fn is_binary(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0 || w == 1.0)
    }

    /// Number of pixels with non-zero weight.
    pub fn support(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.support() == 0
    }

    /// Hard mask: 1 where weight > `cut`, else 0.
    pub fn binarize(&self, cut: f32) -> RegionMask {
        self.map(|w| if w > cut { 1.0 } else { 0.0 })
    }

    /// `true` when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &RegionMask) -> bool {
        self.weights
            .iter()
            .zip(&other.weights)
            .all(|(&a, &b)| a <= b)
    }

    fn map(&self, f: impl Fn(f32) -> f32) -> RegionMask {
        RegionMask {
            weights: self.weights.iter().map(|&w| f(w)).collect(),
            ..*self
        }
    }

    fn check_same_grid(&self, other: &RegionMask) -> Result<()> {
        if self.height != other.height || self.width != other.width {
            return Err(Error::shape(
                format!("{}x{} mask", self.height, self.width),
                format!("{}x{} mask", other.height, other.width),
            ));
        }
        Ok(())
    }
}

/// Light-source mask: pixels whose darkest channel reaches `threshold`,
/// cleaned with a morphological opening by a `(2r+1)²` square.
pub fn extract_light_mask(img: &Image, threshold: f32, se_radius: usize) -> Result<RegionMask> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::parameter(format!(
            "saturation threshold must lie in (0, 1], got {threshold}"
        )));
    }
    let raw = channel_reduce(img, f32::min, threshold, MaskRole::LightSource);
    Ok(opening(&raw, se_radius))
}

/// Flare-presence mask: pixels whose brightest channel reaches `tau`.
pub fn flare_mask_from_flare_image(flare: &Image, tau: f32) -> RegionMask {
    channel_reduce(flare, f32::max, tau, MaskRole::Flare)
}

fn channel_reduce(
    img: &Image,
    reduce: fn(f32, f32) -> f32,
    threshold: f32,
    role: MaskRole,
) -> RegionMask {
    let weights = img
        .as_slice()
        .chunks_exact(img.channels())
        .map(|px| {
            let v = px[1..].iter().fold(px[0], |acc, &s| reduce(acc, s));
            if v >= threshold {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    RegionMask::from_parts(img.height(), img.width(), role, weights)
}

/// Per-pixel maximum (logical OR on binary masks). Keeps the role of `a`.
pub fn mask_or(a: &RegionMask, b: &RegionMask) -> Result<RegionMask> {
    a.check_same_grid(b)?;
    Ok(RegionMask {
        weights: a
            .weights
            .iter()
            .zip(&b.weights)
            .map(|(&x, &y)| x.max(y))
            .collect(),
        ..*a
    })
}

/// Per-pixel minimum (logical AND on binary masks). Keeps the role of `a`.
pub fn mask_and(a: &RegionMask, b: &RegionMask) -> Result<RegionMask> {
    a.check_same_grid(b)?;
    Ok(RegionMask {
        weights: a
            .weights
            .iter()
            .zip(&b.weights)
            .map(|(&x, &y)| x.min(y))
            .collect(),
        ..*a
    })
}

/// `1 − w` at every pixel.
pub fn mask_complement(a: &RegionMask) -> RegionMask {
    let role = match a.role {
        MaskRole::Flare => MaskRole::NonFlare,
        MaskRole::NonFlare => MaskRole::Flare,
        other => other,
    };
    a.map(|w| 1.0 - w).with_role(role)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Sigmoid attention map `σ(gain·(w − ½))`.
pub fn soft_attention(mask: &RegionMask, gain: f32) -> Result<RegionMask> {
    if !(gain > 0.0 && gain.is_finite()) {
        return Err(Error::parameter(format!(
            "attention gain must be positive, got {gain}"
        )));
    }
    let g = gain as f64;
    Ok(mask.map(|w| logistic(g * (w as f64 - 0.5)) as f32))
}
