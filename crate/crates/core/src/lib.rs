//! Synthesis, region masks, scoring and loss kernels for nighttime
//! lens-flare removal benchmarks.
//!
//! Pixel values are display-encoded intensities in `[0, 1]` unless a
//! function says otherwise.

pub mod datacli;
pub mod error;
pub mod imgcore;
pub mod losskit;
pub mod metrics;
pub mod postproc;
pub mod regionmask;
pub mod synth;

pub use error::{Error, Result};
