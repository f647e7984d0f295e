use crate::error::{Error, Result};
use crate::imgcore::Image;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;

fn window(n: usize) -> Vec<f64> {
    let centre = (n as f64 - 1.0) / 2.0;
    let mut g: Vec<f64> = (0..n)
        .map(|k| {
            let d = k as f64 - centre;
            (-(d * d) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let s: f64 = g.iter().sum();
    g.iter_mut().for_each(|v| *v /= s);
    g
}

/// Valid-mode separable correlation of an `h×w` plane.
fn correlate_valid(plane: &[f64], h: usize, w: usize, g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let (oh, ow) = (h - n + 1, w - n + 1);
    let mut rows = vec![0.0; h * ow];
    for y in 0..h {
        for x in 0..ow {
            let src = &plane[y * w + x..y * w + x + n];
            rows[y * ow + x] = g.iter().zip(src).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for (k, &gk) in g.iter().enumerate() {
            let src = &rows[(y + k) * ow..(y + k + 1) * ow];
            for (o, &v) in out[y * ow..(y + 1) * ow].iter_mut().zip(src) {
                *o += gk * v;
            }
        }
    }
    out
}

/// Mean structural similarity for unit dynamic range.
///
/// Local statistics use an 11×11 Gaussian window (σ = 1.5) evaluated only
/// where it fits inside the image; images narrower than 11 pixels use a
/// window as wide as the image. The map is averaged over positions and
/// channels.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    a.check_same_shape(b)?;
    let (h, w, c) = (a.height(), a.width(), a.channels());
    if h < 2 || w < 2 {
        return Err(Error::parameter(format!(
            "SSIM needs at least a 2x2 image, got {h}x{w}"
        )));
    }
    let g = window(SSIM_WINDOW.min(h).min(w));
    let mut total = 0.0;
    let mut count = 0usize;
    for ch in 0..c {
        let pa: Vec<f64> = a.as_slice().iter().skip(ch).step_by(c).map(|&v| v as f64).collect();
        let pb: Vec<f64> = b.as_slice().iter().skip(ch).step_by(c).map(|&v| v as f64).collect();
        let aa: Vec<f64> = pa.iter().map(|v| v * v).collect();
        let bb: Vec<f64> = pb.iter().map(|v| v * v).collect();
        let ab: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
        let mu_a = correlate_valid(&pa, h, w, &g);
        let mu_b = correlate_valid(&pb, h, w, &g);
        let e_aa = correlate_valid(&aa, h, w, &g);
        let e_bb = correlate_valid(&bb, h, w, &g);
        let e_ab = correlate_valid(&ab, h, w, &g);
        for i in 0..mu_a.len() {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = e_aa[i] - ma * ma;
            let vb = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            let num = (2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2);
            let den = (ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2);
            total += num / den;
        }
        count += mu_a.len();
    }
    Ok(total / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(h: usize, w: usize, c: usize, seed: u64) -> Image {
        let mut s = seed.wrapping_add(0x9E3779B97F4A7C15);
        Image::from_fn(h, w, c, |_, _, _| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 40) as f32 / (1u64 << 24) as f32
        })
    }

    /// Direct 2-D sliding window with the explicit outer-product kernel.
    fn reference(a: &Image, b: &Image) -> f64 {
        let (h, w, c) = (a.height(), a.width(), a.channels());
        let n = SSIM_WINDOW.min(h).min(w);
        let centre = (n as f64 - 1.0) / 2.0;
        let mut k2 = vec![vec![0.0; n]; n];
        let mut s = 0.0;
        for (i, row) in k2.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let r2 = (i as f64 - centre).powi(2) + (j as f64 - centre).powi(2);
                *v = (-r2 / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
                s += *v;
            }
        }
        let mut total = 0.0;
        let mut count = 0;
        for ch in 0..c {
            for y in 0..=h - n {
                for x in 0..=w - n {
                    let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                    for i in 0..n {
                        for j in 0..n {
                            let k = k2[i][j] / s;
                            let va = a.get(y + i, x + j, ch) as f64;
                            let vb = b.get(y + i, x + j, ch) as f64;
                            ma += k * va;
                            mb += k * vb;
                            saa += k * va * va;
                            sbb += k * vb * vb;
                            sab += k * va * vb;
                        }
                    }
                    let (va, vb, cov) = (saa - ma * ma, sbb - mb * mb, sab - ma * mb);
                    total += ((2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2))
                        / ((ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2));
                    count += 1;
                }
            }
        }
        total / count as f64
    }

    #[test]
    fn self_similarity() {
        let a = noise(24, 19, 3, 1);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_black_vs_white() {
        let a = Image::zeros(16, 16, 1);
        let b = Image::filled(16, 16, 1, 1.0);
        let expected = SSIM_C1 / (1.0 + SSIM_C1);
        assert!((ssim(&a, &b).unwrap() - expected).abs() < 1e-9);
        assert!((expected - 9.999e-5).abs() < 1e-8);
    }

    #[test]
    fn matches_windowed_reference() {
        for seed in 0..3 {
            let a = noise(32, 32, 1, seed);
            let b = noise(32, 32, 1, seed + 100);
            assert!((ssim(&a, &b).unwrap() - reference(&a, &b)).abs() < 1e-6);
        }
        let a = noise(8, 6, 3, 9);
        let b = noise(8, 6, 3, 10);
        assert!((ssim(&a, &b).unwrap() - reference(&a, &b)).abs() < 1e-6);
    }

    #[test]
    fn bounded() {
        let a = noise(20, 20, 3, 4);
        let b = a.map(|v| 1.0 - v);
        let s = ssim(&a, &b).unwrap();
        assert!((-1.0..=1.0).contains(&s));
        assert!(s < 0.0);
    }

    #[test]
    fn too_small() {
        let a = Image::zeros(1, 5, 1);
        assert!(ssim(&a, &a).is_err());
        let a = Image::zeros(2, 2, 1);
        assert!(ssim(&a, &a).is_ok());
    }
}
