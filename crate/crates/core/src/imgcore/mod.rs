//! Pixel container and the low-level raster operations every other module
//! builds on: gamma transfer, separable Gaussian blur, integer translation,
//! lossless geometric augmentation and masked compositing.

mod filter;
mod gamma;
mod geometry;
mod image;

pub use self::filter::{gaussian_blur, gaussian_kernel, reflect_index, sigma_for_kernel};
pub use self::gamma::{to_encoded, to_linear, Gamma};
pub use self::geometry::{geometric_augment, translate, Augment};
pub use self::image::{clamp01, composite, Image, Shape};
