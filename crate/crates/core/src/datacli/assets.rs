use std::path::{Path, PathBuf};

use super::io::{conform, load_image, resize_to, to_rgb};
use super::manifest::{load_flare_list, load_path_list, FlareEntry};
use crate::error::Result;
use crate::imgcore::{Image, Shape};
use crate::synth::{AssetSource, FlareAsset};

/// Backgrounds and flares read from disk on demand. Flares and their
/// annotation layers are resized to the background's extent.
#[derive(Debug, Clone, Default)]
pub struct FileAssets {
    pub backgrounds: Vec<PathBuf>,
    pub flares: Vec<FlareEntry>,
}

impl FileAssets {
    pub fn from_lists(backgrounds: &Path, flares: &Path) -> Result<Self> {
        Ok(Self {
            backgrounds: load_path_list(backgrounds)?,
            flares: load_flare_list(flares)?,
        })
    }
}

fn layer(path: &Option<PathBuf>, shape: Shape) -> Result<Option<Image>> {
    path.as_deref()
        .map(|p| Ok(resize_to(load_image(p)?, shape.height, shape.width)))
        .transpose()
}

impl AssetSource for FileAssets {
    fn background_count(&self) -> usize {
        self.backgrounds.len()
    }

    fn flare_count(&self) -> usize {
        self.flares.len()
    }

    fn background(&self, index: usize) -> Result<Image> {
        Ok(to_rgb(load_image(&self.backgrounds[index])?))
    }

    fn flare(&self, index: usize, shape: Shape) -> Result<FlareAsset> {
        let e = &self.flares[index];
        Ok(FlareAsset {
            flare: conform(load_image(&e.flare)?, shape),
            light: layer(&e.light, shape)?,
            glare: layer(&e.glare, shape)?,
            streak: layer(&e.streak, shape)?,
        })
    }
}
