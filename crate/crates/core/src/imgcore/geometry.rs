use super::Image;
use crate::error::{Error, Result};

/// Shifts content by `(dx, dy)` pixels (positive = right/down). Vacated
/// pixels are zero. Shifts at least as large as the extent give an all-zero
/// image.
pub fn translate(img: &Image, dx: isize, dy: isize) -> Image {
    let (h, w, c) = (img.height(), img.width(), img.channels());
    if dx == 0 && dy == 0 {
        return img.clone();
    }
    let mut out = vec![0.0f32; h * w * c];
    if dx.unsigned_abs() >= w || dy.unsigned_abs() >= h {
        return img.with_data(out);
    }
    let src = img.as_slice();
    // Destination columns [x0, x1) receive source columns shifted by dx.
    let x0 = dx.max(0) as usize;
    let x1 = (w as isize + dx.min(0)) as usize;
    let span = (x1 - x0) * c;
    for y in 0..h {
        let sy = y as isize - dy;
        if sy < 0 || sy >= h as isize {
            continue;
        }
        let sy = sy as usize;
        let sx0 = (x0 as isize - dx) as usize;
        let dst = (y * w + x0) * c;
        let from = (sy * w + sx0) * c;
        out[dst..dst + span].copy_from_slice(&src[from..from + span]);
    }
    img.with_data(out)
}

/// Lossless geometric augmentations.
///
/// Rotations are counter-clockwise: `Rot90` maps the top-right corner to the
/// top-left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Augment {
    Rot90,
    Rot180,
    Rot270,
    HFlip,
    VFlip,
    Crop {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
}

impl Augment {
    /// The operation that undoes this one. Crops have no inverse.
    pub fn inverse(self) -> Option<Augment> {
        match self {
            Augment::Rot90 => Some(Augment::Rot270),
            Augment::Rot270 => Some(Augment::Rot90),
            Augment::Crop { .. } => None,
            other => Some(other),
        }
    }
}

pub fn geometric_augment(img: &Image, op: Augment) -> Result<Image> {
    let (h, w, c) = (img.height(), img.width(), img.channels());
    // (out_h, out_w, source coordinate for an output coordinate)
    let (oh, ow): (usize, usize);
    let map: Box<dyn Fn(usize, usize) -> (usize, usize)> = match op {
        Augment::Rot90 => {
            (oh, ow) = (w, h);
            Box::new(move |i, j| (j, w - 1 - i))
        }
        Augment::Rot180 => {
            (oh, ow) = (h, w);
            Box::new(move |i, j| (h - 1 - i, w - 1 - j))
        }
        Augment::Rot270 => {
            (oh, ow) = (w, h);
            Box::new(move |i, j| (h - 1 - j, i))
        }
        Augment::HFlip => {
            (oh, ow) = (h, w);
            Box::new(move |i, j| (i, w - 1 - j))
        }
        Augment::VFlip => {
            (oh, ow) = (h, w);
            Box::new(move |i, j| (h - 1 - i, j))
        }
        Augment::Crop {
            x,
            y,
            width,
            height,
        } => {
            if width == 0 || height == 0 || x + width > w || y + height > h {
                return Err(Error::parameter(format!(
                    "crop {width}x{height}+{x}+{y} outside {h}x{w} image"
                )));
            }
            (oh, ow) = (height, width);
            Box::new(move |i, j| (y + i, x + j))
        }
    };
    let src = img.as_slice();
    let mut out = Vec::with_capacity(oh * ow * c);
    for i in 0..oh {
        for j in 0..ow {
            let (sy, sx) = map(i, j);
            let base = (sy * w + sx) * c;
            out.extend_from_slice(&src[base..base + c]);
        }
    }
    Ok(Image::from_parts(oh, ow, c, out))
}
