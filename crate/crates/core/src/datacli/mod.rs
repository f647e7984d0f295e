//! Files, manifests, configuration and the `flarebench` command line.

mod assets;
pub mod commands;
pub mod config;
pub mod io;
pub mod manifest;

pub use self::assets::FileAssets;
pub use self::commands::{cli_dispatch, Cli, THREADS_ENV};
pub use self::config::RunConfig;
pub use self::io::{load_image, load_mask, save_image, save_mask, BitDepth};
pub use self::manifest::{load_manifest, write_manifest, FlareEntry, Manifest, ManifestRecord};
