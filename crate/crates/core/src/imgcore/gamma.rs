use super::Image;
use crate::error::{Error, Result};

/// Gamma exponent `θ > 0`.
///
/// Linearization ("inverse gamma correction") raises encoded samples to
/// `θ`; encoding raises linear samples to `1/θ`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Gamma(f64);

impl Gamma {
    pub const IDENTITY: Gamma = Gamma(1.0);

    pub fn new(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::parameter(format!(
                "gamma exponent must be positive and finite, got {theta}"
            )));
        }
        Ok(Gamma(theta))
    }

    #[inline]
    pub fn theta(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Gamma {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Gamma::new(value)
    }
}

impl From<Gamma> for f64 {
    fn from(g: Gamma) -> f64 {
        g.0
    }
}

fn power(img: &Image, exponent: f64) -> Image {
    if exponent == 1.0 {
        return img.clone();
    }
    // Negative inputs only arise from rounding; pow of a negative base is NaN.
    img.map(|v| (v.max(0.0) as f64).powf(exponent) as f32)
}

/// Encoded → linear: every sample becomes `v^θ`.
pub fn to_linear(img: &Image, gamma: Gamma) -> Image {
    power(img, gamma.0)
}

/// Linear → encoded: every sample becomes `v^(1/θ)`.
pub fn to_encoded(img: &Image, gamma: Gamma) -> Image {
    power(img, 1.0 / gamma.0)
}
