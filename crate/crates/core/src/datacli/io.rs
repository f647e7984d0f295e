//! PNG I/O. Integer code `v` of a `b`-bit file maps to `v / (2^b − 1)`;
//! encoding clips to `[0, 1]` and rounds half away from zero.

use std::path::Path;

use image::imageops::{resize, FilterType};
use image::{DynamicImage, ImageBuffer, ImageFormat, ImageReader, Luma, Rgb};

use crate::error::{Error, Result};
use crate::imgcore::{Image, Shape};
use crate::regionmask::{MaskRole, RegionMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum BitDepth {
    #[value(name = "8")]
    Eight,
    #[default]
    #[value(name = "16")]
    Sixteen,
}

fn decode_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn scaled<T: Copy + Into<f64>>(px: &[T], max: f64) -> Vec<f32> {
    px.iter().map(|&v| (v.into() / max) as f32).collect()
}

pub fn load_image(path: &Path) -> Result<Image> {
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    let decoded = reader.decode().map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => decode_err(path, other),
    })?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let (channels, data) = match decoded {
        DynamicImage::ImageLuma8(b) => (1, scaled(b.as_raw(), 255.0)),
        DynamicImage::ImageLumaA8(_) => (1, scaled(decoded.to_luma8().as_raw(), 255.0)),
        DynamicImage::ImageLuma16(b) => (1, scaled(b.as_raw(), 65535.0)),
        DynamicImage::ImageLumaA16(_) => (1, scaled(decoded.to_luma16().as_raw(), 65535.0)),
        DynamicImage::ImageRgb8(b) => (3, scaled(b.as_raw(), 255.0)),
        DynamicImage::ImageRgba8(_) => (3, scaled(decoded.to_rgb8().as_raw(), 255.0)),
        DynamicImage::ImageRgb16(b) => (3, scaled(b.as_raw(), 65535.0)),
        DynamicImage::ImageRgba16(_) => (3, scaled(decoded.to_rgb16().as_raw(), 65535.0)),
        other => (3, other.to_rgb32f().into_raw()),
    };
    Image::new(h, w, channels, data).map_err(|e| decode_err(path, e))
}

fn quantize(v: f32, max: f64) -> f64 {
    (v.clamp(0.0, 1.0) as f64 * max).round()
}

/// Integer codes an image would be stored with at `depth`.
pub fn encode_codes(img: &Image, depth: BitDepth) -> Vec<u16> {
    let max = match depth {
        BitDepth::Eight => 255.0,
        BitDepth::Sixteen => 65535.0,
    };
    img.as_slice().iter().map(|&v| quantize(v, max) as u16).collect()
}

fn write_err(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => decode_err(path, other),
    }
}

pub fn save_image(img: &Image, path: &Path, depth: BitDepth) -> Result<()> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let codes = encode_codes(img, depth);
    let res = match (depth, img.channels()) {
        (BitDepth::Eight, 1) => {
            let raw = codes.iter().map(|&v| v as u8).collect();
            ImageBuffer::<Luma<u8>, Vec<u8>>::from_raw(w, h, raw)
                .expect("buffer size")
                .save_with_format(path, ImageFormat::Png)
        }
        (BitDepth::Eight, _) => {
            let raw = codes.iter().map(|&v| v as u8).collect();
            ImageBuffer::<Rgb<u8>, Vec<u8>>::from_raw(w, h, raw)
                .expect("buffer size")
                .save_with_format(path, ImageFormat::Png)
        }
        (BitDepth::Sixteen, 1) => ImageBuffer::<Luma<u16>, Vec<u16>>::from_raw(w, h, codes)
            .expect("buffer size")
            .save_with_format(path, ImageFormat::Png),
        (BitDepth::Sixteen, _) => ImageBuffer::<Rgb<u16>, Vec<u16>>::from_raw(w, h, codes)
            .expect("buffer size")
            .save_with_format(path, ImageFormat::Png),
    };
    res.map_err(|e| write_err(path, e))
}

/// Loads a mask; multi-channel files use their first channel.
pub fn load_mask(path: &Path, role: MaskRole) -> Result<RegionMask> {
    Ok(RegionMask::from_image(&load_image(path)?, role))
}

/// Saves a mask as 8-bit grey (binary masks become 0/255).
pub fn save_mask(mask: &RegionMask, path: &Path) -> Result<()> {
    save_image(&mask.to_image(), path, BitDepth::Eight)
}

/// Replicates a single-channel image into three channels.
pub fn to_rgb(img: Image) -> Image {
    if img.channels() == 3 {
        return img;
    }
    let data = img.as_slice().iter().flat_map(|&v| [v, v, v]).collect();
    Image::new(img.height(), img.width(), 3, data).expect("same extent")
}

/// Resizes `img` to `height × width` (triangle filter) keeping its channel
/// count. Returns the input unchanged when the extent already matches.
pub fn resize_to(img: Image, height: usize, width: usize) -> Image {
    if img.height() == height && img.width() == width {
        return img;
    }
    let (sw, sh) = (img.width() as u32, img.height() as u32);
    let (tw, th) = (width as u32, height as u32);
    let c = img.channels();
    let data = if c == 1 {
        let buf = ImageBuffer::<Luma<f32>, Vec<f32>>::from_raw(sw, sh, img.into_vec()).expect("buffer size");
        resize(&buf, tw, th, FilterType::Triangle).into_raw()
    } else {
        let buf = ImageBuffer::<Rgb<f32>, Vec<f32>>::from_raw(sw, sh, img.into_vec()).expect("buffer size");
        resize(&buf, tw, th, FilterType::Triangle).into_raw()
    };
    Image::new(height, width, c, data).expect("resized extent")
}

/// Brings a flare-like layer onto the pixel grid of `shape`.
pub fn conform(img: Image, shape: Shape) -> Image {
    let img = if shape.channels == 3 { to_rgb(img) } else { img };
    resize_to(img, shape.height, shape.width)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip_16_bit() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.png");
        let img = Image::from_fn(5, 7, 3, |y, x, c| ((y * 7 + x) * 3 + c) as f32 / 104.0);
        save_image(&img, &p, BitDepth::Sixteen).unwrap();
        let back = load_image(&p).unwrap();
        assert_eq!(back.shape(), img.shape());
        for (a, b) in img.as_slice().iter().zip(back.as_slice()) {
            assert!((a - b).abs() <= 0.5 / 65535.0 + 1e-7);
        }
        // Re-encoding decoded codes is lossless.
        assert_eq!(encode_codes(&back, BitDepth::Sixteen), encode_codes(&img, BitDepth::Sixteen));
    }

    #[test]
    fn eight_bit_codes_and_rounding() {
        let img = Image::new(1, 4, 1, vec![0.0, 1.0, 0.5 / 255.0, 1.5]).unwrap();
        assert_eq!(encode_codes(&img, BitDepth::Eight), vec![0, 255, 1, 255]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.png");
        save_image(&img, &p, BitDepth::Eight).unwrap();
        let back = load_image(&p).unwrap();
        assert_eq!(back.channels(), 1);
        assert_eq!(back.get(0, 1, 0), 1.0);
        assert_eq!(back.get(0, 2, 0), (1.0f64 / 255.0) as f32);
    }

    #[test]
    fn mask_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.png");
        let m = RegionMask::from_predicate(6, 6, MaskRole::Glare, |y, x| y > x);
        save_mask(&m, &p).unwrap();
        assert_eq!(load_mask(&p, MaskRole::Glare).unwrap(), m);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_image(Path::new("/nonexistent/file.png")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn resize_keeps_constant() {
        let img = Image::filled(20, 30, 3, 0.25);
        let out = resize_to(img, 8, 12);
        assert_eq!((out.height(), out.width()), (8, 12));
        assert!(out.as_slice().iter().all(|&v| (v - 0.25).abs() < 1e-6));
    }
}
