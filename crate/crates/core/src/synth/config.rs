use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regionmask::{DEFAULT_FLARE_TAU, DEFAULT_LIGHT_THRESHOLD, DEFAULT_SE_RADIUS};

/// How many flares (light sources) a sample receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountRule {
    /// Always `flare_count` flares.
    Fixed,
    /// `k + 1` flares with probability proportional to `lightsource_count_weights[k]`.
    Weighted,
}

/// Thresholds used to derive the light/glare/streak masks of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskOptions {
    pub light_threshold: f32,
    pub se_radius: usize,
    pub flare_tau: f32,
}

impl Default for MaskOptions {
    fn default() -> Self {
        Self {
            light_threshold: DEFAULT_LIGHT_THRESHOLD,
            se_radius: DEFAULT_SE_RADIUS,
            flare_tau: DEFAULT_FLARE_TAU,
        }
    }
}

/// Blue, yellow and white flare tints.
pub fn default_palette() -> Vec<[f32; 3]> {
    vec![[0.6, 0.8, 1.2], [1.2, 1.1, 0.7], [1.0, 1.0, 1.0]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub gamma_range: (f64, f64),
    /// Inclusive range of odd Gaussian kernel sizes.
    pub blur_kernel_range: (usize, usize),
    pub gain_range: (f64, f64),
    pub flare_count: usize,
    pub count_rule: CountRule,
    /// Maximum flare offset per axis as a fraction of that axis' extent.
    pub offset_fraction: f64,
    pub lightsource_count_weights: Vec<f64>,
    pub color_jitter: bool,
    /// Tints are rescaled so their largest component is 1 before use.
    pub palette: Vec<[f32; 3]>,
    pub masks: MaskOptions,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            gamma_range: (1.8, 2.2),
            blur_kernel_range: (5, 21),
            gain_range: (0.8, 1.0),
            flare_count: 4,
            count_rule: CountRule::Weighted,
            offset_fraction: 0.3,
            lightsource_count_weights: vec![11.0, 4.0, 1.0],
            color_jitter: true,
            palette: default_palette(),
            masks: MaskOptions::default(),
        }
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::Config(format!("{name}: need finite lo <= hi, got [{lo}, {hi}]")));
    }
    Ok(())
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        check_range("gamma_range", self.gamma_range)?;
        if self.gamma_range.0 <= 0.0 {
            return Err(Error::Config("gamma_range must be positive".into()));
        }
        let (klo, khi) = self.blur_kernel_range;
        if klo > khi || klo % 2 == 0 || khi % 2 == 0 {
            return Err(Error::Config(format!(
                "blur_kernel_range needs odd lo <= hi, got [{klo}, {khi}]"
            )));
        }
        check_range("gain_range", self.gain_range)?;
        if self.gain_range.0 < 0.0 {
            return Err(Error::Config("gain_range must be non-negative".into()));
        }
        if self.flare_count == 0 {
            return Err(Error::Config("flare_count must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.offset_fraction) {
            return Err(Error::Config(format!(
                "offset_fraction must lie in [0, 1], got {}",
                self.offset_fraction
            )));
        }
        let w = &self.lightsource_count_weights;
        if w.is_empty() || w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || w.iter().all(|v| *v == 0.0) {
            return Err(Error::Config(
                "lightsource_count_weights must be non-negative and not all zero".into(),
            ));
        }
        if self.palette.is_empty() {
            return Err(Error::Config("palette must contain at least one tint".into()));
        }
        if self
            .palette
            .iter()
            .any(|t| t.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || t.iter().all(|v| *v == 0.0))
        {
            return Err(Error::Config("palette tints must be non-negative and non-zero".into()));
        }
        let m = &self.masks;
        if !(m.light_threshold > 0.0 && m.light_threshold <= 1.0) {
            return Err(Error::Config("light_threshold must lie in (0, 1]".into()));
        }
        if !(m.flare_tau.is_finite() && m.flare_tau >= 0.0) {
            return Err(Error::Config("flare_tau must be non-negative".into()));
        }
        Ok(())
    }

    /// Palette with each tint divided by its largest component.
    pub fn normalized_palette(&self) -> Vec<[f32; 3]> {
        self.palette
            .iter()
            .map(|t| {
                let peak = t.iter().cloned().fold(0.0f32, f32::max);
                [t[0] / peak, t[1] / peak, t[2] / peak]
            })
            .collect()
    }
}
