use std::fmt;

use crate::error::{Error, Result};
use crate::regionmask::RegionMask;

/// Raster dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.height, self.width, self.channels)
    }
}

/// An `H×W×C` floating-point raster, row-major with interleaved channels.
///
/// Samples are nominally in `[0, 1]`. Intermediate results of additive
/// compositing may leave that range until [`clamp01`] is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::parameter(format!(
                "image extent must be at least 1x1, got {height}x{width}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::parameter(format!(
                "images have 1 or 3 channels, got {channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::shape(
                format!("{} samples", height * width * channels),
                format!("{} samples", data.len()),
            ));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    /// Constant image. Panics on a zero extent or a channel count other than 1 or 3.
    pub fn filled(height: usize, width: usize, channels: usize, value: f32) -> Self {
        Self::new(height, width, channels, vec![value; height * width * channels])
            .expect("valid image extent")
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Self::filled(height, width, channels, 0.0)
    }

    /// Builds an image from `f(y, x, c)`. Panics on an invalid extent.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Self {
        let mut data = Vec::with_capacity(height * width * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(y, x, c));
                }
            }
        }
        Self::new(height, width, channels, data).expect("valid image extent")
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> Shape {
        Shape {
            height: self.height,
            width: self.width,
            channels: self.channels,
        }
    }

    #[inline]
    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn index(&self, y: usize, x: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[self.index(y, x, c)]
    }

    /// Applies `f` to every sample.
    pub fn map(&self, f: impl Fn(f32) -> f32) -> Image {
        Image {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }

    /// Combines two same-shaped images sample by sample.
    pub fn zip_map(&self, other: &Image, f: impl Fn(f32, f32) -> f32) -> Result<Image> {
        self.check_same_shape(other)?;
        Ok(Image {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            ..*self
        })
    }

    pub fn check_same_shape(&self, other: &Image) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::shape(self.shape(), other.shape()));
        }
        Ok(())
    }

    /// Fails unless `mask` covers exactly this image's pixel grid.
    pub fn check_mask(&self, mask: &RegionMask) -> Result<()> {
        if mask.height() != self.height || mask.width() != self.width {
            return Err(Error::shape(
                format!("{}x{} mask", self.height, self.width),
                format!("{}x{} mask", mask.height(), mask.width()),
            ));
        }
        Ok(())
    }

    /// Per-channel multiplicative gain. Single-channel images use the first gain.
    pub fn scale_channels(&self, gains: [f32; 3]) -> Image {
        let c = self.channels;
        Image {
            data: self
                .data
                .iter()
                .enumerate()
                .map(|(i, &v)| v * if c == 1 { gains[0] } else { gains[i % c] })
                .collect(),
            ..*self
        }
    }

    /// Same pixel grid, samples replaced. Length must match.
    pub(crate) fn with_data(&self, data: Vec<f32>) -> Image {
        debug_assert_eq!(data.len(), self.data.len());
        Image {
            data,
            ..*self
        }
    }

    pub(crate) fn from_parts(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Image {
        debug_assert_eq!(data.len(), height * width * channels);
        Image {
            height,
            width,
            channels,
            data,
        }
    }

    /// Adds `other` in place. Same shape required.
    pub(crate) fn accumulate(&mut self, other: &Image, scale: f32) -> Result<()> {
        self.check_same_shape(other)?;
        for (d, &s) in self.data.iter_mut().zip(&other.data) {
            *d += scale * s;
        }
        Ok(())
    }
}

/// Clips every sample into `[0, 1]`.
pub fn clamp01(img: &Image) -> Image {
    img.map(|v| v.clamp(0.0, 1.0))
}

/// Masked blend `a·m + b·(1−m)` with the mask broadcast over channels.
pub fn composite(a: &Image, b: &Image, mask: &RegionMask) -> Result<Image> {
    a.check_same_shape(b)?;
    a.check_mask(mask)?;
    let c = a.channels();
    let w = mask.weights();
    let data = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .enumerate()
        .map(|(i, (&av, &bv))| {
            let m = w[i / c];
            av * m + bv * (1.0 - m)
        })
        .collect();
    Ok(a.with_data(data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regionmask::MaskRole;

    #[test]
    fn rejects_bad_extents() {
        assert!(Image::new(0, 3, 1, vec![]).is_err());
        assert!(Image::new(2, 2, 2, vec![0.0; 8]).is_err());
        assert!(Image::new(2, 2, 3, vec![0.0; 11]).is_err());
    }

    #[test]
    fn clamp_clips_both_ends() {
        let img = Image::new(1, 3, 1, vec![1.7, -0.1, 0.4]).unwrap();
        assert_eq!(clamp01(&img).as_slice(), &[1.0, 0.0, 0.4]);
    }

    #[test]
    fn composite_identities() {
        let a = Image::from_fn(4, 5, 3, |y, x, c| (y * 7 + x * 3 + c) as f32 / 40.0);
        let b = Image::from_fn(4, 5, 3, |y, x, c| (x * 5 + y + c * 2) as f32 / 40.0);
        let ones = RegionMask::full(4, 5, MaskRole::Custom);
        let zeros = RegionMask::empty(4, 5, MaskRole::Custom);
        assert_eq!(composite(&a, &b, &ones).unwrap(), a);
        assert_eq!(composite(&a, &b, &zeros).unwrap(), b);
    }

    #[test]
    fn composite_uniform_quarter() {
        let a = Image::filled(3, 3, 1, 1.0);
        let b = Image::zeros(3, 3, 1);
        let m = RegionMask::new(3, 3, MaskRole::Custom, vec![0.25; 9]).unwrap();
        let out = composite(&a, &b, &m).unwrap();
        assert!(out.as_slice().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn composite_rejects_mismatch() {
        let a = Image::zeros(3, 3, 1);
        let b = Image::zeros(3, 4, 1);
        let m = RegionMask::empty(3, 3, MaskRole::Custom);
        assert!(matches!(composite(&a, &b, &m), Err(Error::Shape { .. })));
        let m = RegionMask::empty(2, 3, MaskRole::Custom);
        assert!(composite(&a, &a, &m).is_err());
    }
}
