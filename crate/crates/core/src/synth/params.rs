use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{CountRule, SynthConfig};

/// Stream ids within a sample's generator.
pub(crate) const PARAM_STREAM: u64 = 0;
pub(crate) const SELECTION_STREAM: u64 = 1;

/// Placement and appearance of one flare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlareParams {
    /// Linearization exponent of this flare.
    pub theta: f64,
    pub kernel_size: usize,
    pub gain: f64,
    pub dx: isize,
    pub dy: isize,
    /// Per-channel tint (all ones when jitter is off).
    pub tint: [f32; 3],
}

/// Every random quantity of one synthesized sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleParams {
    pub sample_seed: u64,
    pub height: usize,
    pub width: usize,
    /// Linearization exponent of the background.
    pub theta_background: f64,
    /// Shared re-encoding exponent of the three outputs.
    pub theta_output: f64,
    pub flares: Vec<FlareParams>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sample `index` under dataset seed `seed`.
pub fn derive_sample_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

pub(crate) fn stream(sample_seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
    rng.set_stream(id);
    rng
}

/// Parameters of sample `index` for a `height × width` canvas.
pub fn sample_params(config: &SynthConfig, index: u64, height: usize, width: usize) -> SampleParams {
    sample_params_from_seed(config, derive_sample_seed(config.seed, index), height, width, None)
}

/// Parameters from an explicit per-sample seed. `flare_count` overrides the
/// configured count rule (the draw still happens so later draws do not move).
pub fn sample_params_from_seed(
    config: &SynthConfig,
    sample_seed: u64,
    height: usize,
    width: usize,
    flare_count: Option<usize>,
) -> SampleParams {
    let mut rng = stream(sample_seed, PARAM_STREAM);
    let (glo, ghi) = config.gamma_range;
    let theta_background = rng.random_range(glo..=ghi);
    let theta_output = rng.random_range(glo..=ghi);

    let drawn = match config.count_rule {
        CountRule::Fixed => config.flare_count,
        CountRule::Weighted => {
            let dist = WeightedIndex::new(&config.lightsource_count_weights)
                .expect("validated light-source weights");
            dist.sample(&mut rng) + 1
        }
    };
    let count = flare_count.unwrap_or(drawn);

    let palette = config.normalized_palette();
    let (klo, khi) = config.blur_kernel_range;
    let odd_choices = (khi - klo) / 2 + 1;
    let max_dx = (config.offset_fraction * width as f64).floor() as i64;
    let max_dy = (config.offset_fraction * height as f64).floor() as i64;
    let flares = (0..count)
        .map(|_| {
            let theta = rng.random_range(glo..=ghi);
            let kernel_size = klo + 2 * rng.random_range(0..odd_choices);
            let gain = rng.random_range(config.gain_range.0..=config.gain_range.1);
            let dx = rng.random_range(-max_dx..=max_dx) as isize;
            let dy = rng.random_range(-max_dy..=max_dy) as isize;
            let pick = rng.random_range(0..palette.len());
            FlareParams {
                theta,
                kernel_size,
                gain,
                dx,
                dy,
                tint: if config.color_jitter { palette[pick] } else { [1.0; 3] },
            }
        })
        .collect();

    SampleParams {
        sample_seed,
        height,
        width,
        theta_background,
        theta_output,
        flares,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let cfg = SynthConfig::default();
        assert_eq!(sample_params(&cfg, 7, 64, 64), sample_params(&cfg, 7, 64, 64));
        assert_ne!(sample_params(&cfg, 7, 64, 64), sample_params(&cfg, 8, 64, 64));
    }

    #[test]
    fn ranges_respected() {
        let cfg = SynthConfig::default();
        for i in 0..500 {
            let p = sample_params(&cfg, i, 100, 50);
            assert!((1..=3).contains(&p.flares.len()));
            for f in &p.flares {
                assert!((1.8..=2.2).contains(&f.theta));
                assert!((5..=21).contains(&f.kernel_size) && f.kernel_size % 2 == 1);
                assert!((0.8..=1.0).contains(&f.gain));
                assert!(f.dx.abs() <= 15 && f.dy.abs() <= 30);
                assert!(f.tint.iter().all(|&v| v <= 1.0));
            }
        }
    }

    #[test]
    fn fixed_rule_and_override() {
        let cfg = SynthConfig {
            count_rule: CountRule::Fixed,
            flare_count: 4,
            ..Default::default()
        };
        assert_eq!(sample_params(&cfg, 0, 8, 8).flares.len(), 4);
        let p = sample_params_from_seed(&cfg, 3, 8, 8, Some(2));
        assert_eq!(p.flares.len(), 2);
    }

    #[test]
    fn seed_mixing_separates_neighbours() {
        let a = derive_sample_seed(0, 0);
        let b = derive_sample_seed(0, 1);
        let c = derive_sample_seed(1, 0);
        assert!(a != b && a != c && b != c);
    }
}
