//! Deterministic paired-data synthesis.
//!
//! A clean background and a handful of flare images are linearized with
//! random gamma exponents, each flare is color-jittered, Gaussian blurred,
//! scaled by a random gain and shifted by a random offset, and the flares are
//! summed. Re-encoding `background + flares`, `background` and `flares` with
//! one shared exponent yields the corrupted, clean and flare-only images.
//!
//! Every random choice for sample `i` comes from a ChaCha stream keyed by a
//! per-sample seed derived from `(config.seed, i)`, so samples can be
//! generated in any order or in parallel with identical results.

mod config;
mod dataset;
mod params;
mod pipeline;

pub use self::config::{default_palette, CountRule, MaskOptions, SynthConfig};
pub use self::dataset::{
    synthesize_dataset, synthesize_dataset_in_memory, AssetSource, InMemoryAssets, SampleResult,
    Selection,
};
pub use self::params::{derive_sample_seed, sample_params, sample_params_from_seed, FlareParams, SampleParams};
pub use self::pipeline::{compose_flares, synthesize_pair, synthesize_pair_with_params, FlareAsset, SamplePair};
