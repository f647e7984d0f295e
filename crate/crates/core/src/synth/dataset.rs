use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SynthConfig;
use super::params::{derive_sample_seed, sample_params_from_seed, stream, SELECTION_STREAM};
use super::pipeline::{synthesize_pair_with_params, FlareAsset, SamplePair};
use crate::error::{Error, Result};
use crate::imgcore::{Image, Shape};

/// Indexed access to backgrounds and flares.
pub trait AssetSource: Sync {
    fn background_count(&self) -> usize;
    fn flare_count(&self) -> usize;
    fn background(&self, index: usize) -> Result<Image>;
    /// Flare `index` conformed to `shape`.
    fn flare(&self, index: usize, shape: Shape) -> Result<FlareAsset>;
}

/// Assets already in memory. Flares must match the background shape.
#[derive(Debug, Clone, Default)]
pub struct InMemoryAssets {
    pub backgrounds: Vec<Image>,
    pub flares: Vec<FlareAsset>,
}

impl AssetSource for InMemoryAssets {
    fn background_count(&self) -> usize {
        self.backgrounds.len()
    }

    fn flare_count(&self) -> usize {
        self.flares.len()
    }

    fn background(&self, index: usize) -> Result<Image> {
        Ok(self.backgrounds[index].clone())
    }

    fn flare(&self, index: usize, shape: Shape) -> Result<FlareAsset> {
        let f = &self.flares[index];
        if f.flare.shape() != shape {
            return Err(Error::shape(shape, f.flare.shape()));
        }
        Ok(f.clone())
    }
}

/// Inputs drawn for one sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub background: usize,
    pub flares: Vec<usize>,
}

/// Outcome of one sample; failures do not stop the run.
#[derive(Debug)]
pub struct SampleResult<R> {
    pub index: usize,
    pub sample_seed: u64,
    pub outcome: Result<R>,
}

fn draw_flares(rng: &mut impl Rng, available: usize, wanted: usize) -> Vec<usize> {
    if wanted <= available {
        index::sample(rng, available, wanted).into_vec()
    } else {
        (0..wanted).map(|_| rng.random_range(0..available)).collect()
    }
}

fn one_sample<S: AssetSource>(source: &S, config: &SynthConfig, sample_seed: u64) -> Result<(SamplePair, Selection)> {
    let mut pick = stream(sample_seed, SELECTION_STREAM);
    let background_index = pick.random_range(0..source.background_count());
    let background = source.background(background_index)?;
    let params = sample_params_from_seed(config, sample_seed, background.height(), background.width(), None);
    let flare_indices = draw_flares(&mut pick, source.flare_count(), params.flares.len());
    let flares = flare_indices
        .iter()
        .map(|&i| source.flare(i, background.shape()))
        .collect::<Result<Vec<_>>>()?;
    let pair = synthesize_pair_with_params(&background, &flares, &params, &config.masks)?;
    Ok((
        pair,
        Selection {
            background: background_index,
            flares: flare_indices,
        },
    ))
}

/// Synthesizes `count` samples and hands each to `consume` as soon as it is
/// ready. Runs on the current rayon pool; results come back in index order
/// and do not depend on the number of threads.
pub fn synthesize_dataset<S, R, F>(
    source: &S,
    config: &SynthConfig,
    count: usize,
    consume: F,
) -> Result<Vec<SampleResult<R>>>
where
    S: AssetSource,
    R: Send,
    F: Fn(usize, SamplePair, Selection) -> Result<R> + Sync,
{
    config.validate()?;
    if source.background_count() == 0 {
        return Err(Error::parameter("background list is empty"));
    }
    if source.flare_count() == 0 {
        return Err(Error::parameter("flare list is empty"));
    }
    Ok((0..count)
        .into_par_iter()
        .map(|i| {
            let sample_seed = derive_sample_seed(config.seed, i as u64);
            let outcome = one_sample(source, config, sample_seed).and_then(|(pair, sel)| consume(i, pair, sel));
            if let Err(e) = &outcome {
                log::error!("sample {i}: {e}");
            }
            SampleResult {
                index: i,
                sample_seed,
                outcome,
            }
        })
        .collect())
}

/// Convenience wrapper keeping every pair in memory.
pub fn synthesize_dataset_in_memory<S: AssetSource>(
    source: &S,
    config: &SynthConfig,
    count: usize,
) -> Result<Vec<SampleResult<(SamplePair, Selection)>>> {
    synthesize_dataset(source, config, count, |_, pair, sel| Ok((pair, sel)))
}
