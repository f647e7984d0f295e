use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::base::l1;
use crate::error::Result;
use crate::imgcore::Image;

/// Unnormalized 2-D DFT of one channel, row-major.
fn dft2(plane: Vec<Complex<f64>>, h: usize, w: usize) -> Vec<Complex<f64>> {
    let mut planner = FftPlanner::new();
    let mut data = plane;
    let row_fft = planner.plan_fft_forward(w);
    for row in data.chunks_exact_mut(w) {
        row_fft.process(row);
    }
    let col_fft = planner.plan_fft_forward(h);
    let mut col = vec![Complex::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            col[y] = data[y * w + x];
        }
        col_fft.process(&mut col);
        for y in 0..h {
            data[y * w + x] = col[y];
        }
    }
    data
}

/// Mean absolute difference between the 2-D DFT coefficients of `a` and `b`.
///
/// Real and imaginary parts count as separate terms, so each channel
/// contributes `Σ(|ΔRe| + |ΔIm|) / (2·H·W)`; channels are averaged. The
/// transform is linear, so it is taken once on `a − b`.
pub fn frequency_reconstruction_loss(a: &Image, b: &Image) -> Result<f64> {
    a.check_same_shape(b)?;
    let (h, w, c) = (a.height(), a.width(), a.channels());
    let mut total = 0.0;
    for ch in 0..c {
        let plane: Vec<Complex<f64>> = a
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .skip(ch)
            .step_by(c)
            .map(|(&x, &y)| Complex::new(x as f64 - y as f64, 0.0))
            .collect();
        let spectrum = dft2(plane, h, w);
        let sum: f64 = spectrum.iter().map(|z| z.re.abs() + z.im.abs()).sum();
        total += sum / (2 * h * w) as f64;
    }
    Ok(total / c as f64)
}

/// L1 plus weighted frequency reconstruction loss.
pub fn lvgroup_loss(pred: &Image, gt: &Image, frequency_weight: f64) -> Result<f64> {
    Ok(l1(pred, gt)? + frequency_weight * frequency_reconstruction_loss(pred, gt)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_dc_only() {
        let a = Image::filled(2, 2, 1, 1.0);
        let b = Image::zeros(2, 2, 1);
        assert!((frequency_reconstruction_loss(&a, &b).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identical_is_zero() {
        let a = Image::from_fn(5, 7, 3, |y, x, c| ((y + 2 * x + c) % 4) as f32 / 4.0);
        assert_eq!(frequency_reconstruction_loss(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn non_power_of_two_and_symmetry() {
        let a = Image::from_fn(3, 5, 1, |y, x, _| (y * 5 + x) as f32 / 15.0);
        let b = Image::from_fn(3, 5, 1, |y, x, _| ((y + x) % 3) as f32 / 3.0);
        assert_eq!(
            frequency_reconstruction_loss(&a, &b).unwrap(),
            frequency_reconstruction_loss(&b, &a).unwrap()
        );
    }
}
