use super::Image;
use crate::error::{Error, Result};

/// Standard deviation used for a kernel of the given odd side: the kernel
/// support then spans ±3σ.
pub fn sigma_for_kernel(kernel_size: usize) -> f64 {
    kernel_size as f64 / 6.0
}

/// Normalized 1-D Gaussian sampled at integer offsets `-r..=r`.
pub fn gaussian_kernel(kernel_size: usize) -> Result<Vec<f64>> {
    if kernel_size == 0 || kernel_size.is_multiple_of(2) {
        return Err(Error::parameter(format!(
            "gaussian kernel size must be odd and positive, got {kernel_size}"
        )));
    }
    let radius = (kernel_size / 2) as isize;
    let sigma = sigma_for_kernel(kernel_size);
    let mut weights: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(weights)
}

/// Maps any integer coordinate into `0..n` by half-sample symmetric
/// reflection (`d c b a | a b c d | d c b a`), repeating as often as needed.
pub fn reflect_index(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

fn tap_table(len: usize, radius: usize) -> Vec<usize> {
    let taps = 2 * radius + 1;
    let mut table = Vec::with_capacity(len * taps);
    for i in 0..len {
        for k in 0..taps {
            table.push(reflect_index(i as isize + k as isize - radius as isize, len));
        }
    }
    table
}

/// Separable Gaussian blur with reflect padding.
///
/// Half-sample reflection keeps the image mean unchanged, so no energy is
/// lost or gained at the borders.
pub fn gaussian_blur(img: &Image, kernel_size: usize) -> Result<Image> {
    let kernel = gaussian_kernel(kernel_size)?;
    if kernel.len() == 1 {
        return Ok(img.clone());
    }
    Ok(convolve_separable(img, &kernel, &kernel))
}

/// Correlates each channel with `row_kernel` along x then `col_kernel` along y.
/// Both kernels must have odd length.
pub(crate) fn convolve_separable(img: &Image, row_kernel: &[f64], col_kernel: &[f64]) -> Image {
    let (h, w, c) = (img.height(), img.width(), img.channels());
    let src = img.as_slice();

    let rr = row_kernel.len() / 2;
    let xs = tap_table(w, rr);
    let mut tmp = vec![0.0f64; h * w * c];
    for y in 0..h {
        let row = &src[y * w * c..(y + 1) * w * c];
        for x in 0..w {
            let taps = &xs[x * row_kernel.len()..(x + 1) * row_kernel.len()];
            for ch in 0..c {
                let mut acc = 0.0f64;
                for (&k, &sx) in row_kernel.iter().zip(taps) {
                    acc += k * row[sx * c + ch] as f64;
                }
                tmp[(y * w + x) * c + ch] = acc;
            }
        }
    }

    let cr = col_kernel.len() / 2;
    let ys = tap_table(h, cr);
    let mut out = vec![0.0f32; h * w * c];
    let mut acc = vec![0.0f64; w * c];
    for y in 0..h {
        acc.iter_mut().for_each(|a| *a = 0.0);
        let taps = &ys[y * col_kernel.len()..(y + 1) * col_kernel.len()];
        for (&k, &sy) in col_kernel.iter().zip(taps) {
            let row = &tmp[sy * w * c..(sy + 1) * w * c];
            for (a, &v) in acc.iter_mut().zip(row) {
                *a += k * v;
            }
        }
        for (o, &a) in out[y * w * c..(y + 1) * w * c].iter_mut().zip(&acc) {
            *o = a as f32;
        }
    }
    img.with_data(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_normalized_and_symmetric() {
        for size in (1..=21).step_by(2) {
            let k = gaussian_kernel(size).unwrap();
            assert_eq!(k.len(), size);
            assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for i in 0..size {
                assert_eq!(k[i], k[size - 1 - i]);
            }
        }
    }

    #[test]
    fn even_or_zero_kernel_rejected() {
        assert!(gaussian_kernel(0).is_err());
        assert!(gaussian_kernel(4).is_err());
        assert!(gaussian_blur(&Image::zeros(4, 4, 1), 6).is_err());
    }

    #[test]
    fn reflect_is_half_sample() {
        let n = 4;
        let got: Vec<usize> = (-5..9).map(|i| reflect_index(i, n)).collect();
        assert_eq!(got, vec![3, 3, 2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0, 0]);
        assert_eq!(reflect_index(0, 1), 0);
        assert_eq!(reflect_index(-7, 1), 0);
    }

    #[test]
    fn constant_stays_constant() {
        let img = Image::filled(9, 13, 3, 0.7);
        for size in [5, 11, 21] {
            let out = gaussian_blur(&img, size).unwrap();
            assert!(out.as_slice().iter().all(|&v| (v - 0.7).abs() < 1e-6));
        }
    }

    #[test]
    fn kernel_wider_than_image() {
        let img = Image::from_fn(3, 2, 1, |y, x, _| (y * 2 + x) as f32 / 6.0);
        let out = gaussian_blur(&img, 21).unwrap();
        let mean_in: f64 = img.as_slice().iter().map(|&v| v as f64).sum::<f64>() / 6.0;
        let mean_out: f64 = out.as_slice().iter().map(|&v| v as f64).sum::<f64>() / 6.0;
        assert!((mean_in - mean_out).abs() < 1e-6);
    }
}
