//! Flat `key = value` run configuration.
//!
//! | key | value |
//! |-----|-------|
//! | `seed` | u64 |
//! | `gamma_min`, `gamma_max` | gamma range |
//! | `blur_kernel_min`, `blur_kernel_max` | odd kernel sizes |
//! | `gain_min`, `gain_max` | flare gain range |
//! | `count_rule` | `fixed` or `weighted` |
//! | `flare_count` | flares per sample under `fixed` |
//! | `lightsource_count_weights` | comma-separated weights for 1, 2, ... flares |
//! | `offset_fraction` | max offset as a fraction of the extent |
//! | `color_jitter` | `true` / `false` |
//! | `palette` | tints as `r,g,b;r,g,b;...` |
//! | `light_threshold`, `se_radius`, `flare_tau` | mask extraction |
//! | `psnr_cap` | PSNR ceiling in dB |
//! | `threads` | worker count, `0` for all cores |
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::DEFAULT_PSNR_CAP;
use crate::synth::{CountRule, SynthConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub synth: SynthConfig,
    pub psnr_cap: f64,
    /// `None` means all available cores.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            synth: SynthConfig::default(),
            psnr_cap: DEFAULT_PSNR_CAP,
            threads: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
}

fn parse_list<T: FromStr>(key: &str, v: &str, sep: char) -> Result<Vec<T>> {
    v.split(sep).map(|x| parse(key, x.trim())).collect()
}

fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

impl RunConfig {
    /// Applies one assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let s = &mut self.synth;
        let v = value.trim();
        match key.trim() {
            "seed" => s.seed = parse(key, v)?,
            "gamma_min" => s.gamma_range.0 = parse(key, v)?,
            "gamma_max" => s.gamma_range.1 = parse(key, v)?,
            "blur_kernel_min" => s.blur_kernel_range.0 = parse(key, v)?,
            "blur_kernel_max" => s.blur_kernel_range.1 = parse(key, v)?,
            "gain_min" => s.gain_range.0 = parse(key, v)?,
            "gain_max" => s.gain_range.1 = parse(key, v)?,
            "flare_count" => s.flare_count = parse(key, v)?,
            "count_rule" => {
                s.count_rule = match v {
                    "fixed" => CountRule::Fixed,
                    "weighted" => CountRule::Weighted,
                    _ => return Err(Error::Config(format!("`count_rule`: expected fixed|weighted, got `{v}`"))),
                }
            }
            "lightsource_count_weights" => s.lightsource_count_weights = parse_list(key, v, ',')?,
            "offset_fraction" => s.offset_fraction = parse(key, v)?,
            "color_jitter" => s.color_jitter = parse(key, v)?,
            "palette" => {
                s.palette = v
                    .split(';')
                    .map(|t| {
                        let c: Vec<f32> = parse_list(key, t, ',')?;
                        <[f32; 3]>::try_from(c)
                            .map_err(|_| Error::Config(format!("`palette`: `{t}` is not an r,g,b triple")))
                    })
                    .collect::<Result<_>>()?
            }
            "light_threshold" => s.masks.light_threshold = parse(key, v)?,
            "se_radius" => s.masks.se_radius = parse(key, v)?,
            "flare_tau" => s.masks.flare_tau = parse(key, v)?,
            "psnr_cap" => self.psnr_cap = parse(key, v)?,
            "threads" => {
                let n: usize = parse(key, v)?;
                self.threads = (n > 0).then_some(n);
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        if !(self.psnr_cap.is_finite() && self.psnr_cap > 0.0) {
            return Err(Error::Config(format!("psnr_cap must be positive, got {}", self.psnr_cap)));
        }
        Ok(())
    }

    /// Parses and validates a configuration text.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            cfg.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {}", i + 1, strip(e))))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text)
    }

    /// Renders every key; parsing the output reproduces `self`.
    pub fn render(&self) -> String {
        let s = &self.synth;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").expect("string write");
        kv("seed", s.seed.to_string());
        kv("gamma_min", s.gamma_range.0.to_string());
        kv("gamma_max", s.gamma_range.1.to_string());
        kv("blur_kernel_min", s.blur_kernel_range.0.to_string());
        kv("blur_kernel_max", s.blur_kernel_range.1.to_string());
        kv("gain_min", s.gain_range.0.to_string());
        kv("gain_max", s.gain_range.1.to_string());
        let rule = match s.count_rule {
            CountRule::Fixed => "fixed",
            CountRule::Weighted => "weighted",
        };
        kv("count_rule", rule.into());
        kv("flare_count", s.flare_count.to_string());
        kv("lightsource_count_weights", join(&s.lightsource_count_weights, ","));
        kv("offset_fraction", s.offset_fraction.to_string());
        kv("color_jitter", s.color_jitter.to_string());
        kv(
            "palette",
            s.palette.iter().map(|t| join(t, ",")).collect::<Vec<_>>().join(";"),
        );
        kv("light_threshold", s.masks.light_threshold.to_string());
        kv("se_radius", s.masks.se_radius.to_string());
        kv("flare_tau", s.masks.flare_tau.to_string());
        kv("psnr_cap", self.psnr_cap.to_string());
        kv("threads", self.threads.unwrap_or(0).to_string());
        out
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}
