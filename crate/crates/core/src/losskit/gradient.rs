use super::base::mse_loss;
use crate::error::Result;
use crate::imgcore::{reflect_index, Image};

/// Discrete image gradient used by the gradient-matching losses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientOperator {
    /// 3×3 Sobel kernels in x and y.
    #[default]
    Sobel,
    /// `I(x+1) − I(x)` and `I(y+1) − I(y)`.
    ForwardDifference,
}

/// Sobel responses `(Gx, Gy)` with reflect padding, one value per sample.
///
/// `Gx` correlates with `[-1 0 1; -2 0 2; -1 0 1]`, `Gy` with its transpose.
pub fn sobel(img: &Image) -> (Vec<f64>, Vec<f64>) {
    let (h, w, c) = (img.height(), img.width(), img.channels());
    let at = |y: isize, x: isize, ch: usize| {
        img.get(reflect_index(y, h), reflect_index(x, w), ch) as f64
    };
    let mut gx = Vec::with_capacity(h * w * c);
    let mut gy = Vec::with_capacity(h * w * c);
    for y in 0..h as isize {
        for x in 0..w as isize {
            for ch in 0..c {
                let p = |dy: isize, dx: isize| at(y + dy, x + dx, ch);
                gx.push(
                    (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1)),
                );
                gy.push(
                    (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1)),
                );
            }
        }
    }
    (gx, gy)
}

fn forward_difference(img: &Image) -> (Vec<f64>, Vec<f64>) {
    let (h, w, c) = (img.height(), img.width(), img.channels());
    let mut gx = Vec::with_capacity(h * w * c);
    let mut gy = Vec::with_capacity(h * w * c);
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let v = img.get(y, x, ch) as f64;
                gx.push(img.get(y, (x + 1).min(w - 1), ch) as f64 - v);
                gy.push(img.get((y + 1).min(h - 1), x, ch) as f64 - v);
            }
        }
    }
    (gx, gy)
}

/// Mean of `(Gx(a) − Gx(b))² + (Gy(a) − Gy(b))²` over all samples.
pub fn gradient_loss(a: &Image, b: &Image, op: GradientOperator) -> Result<f64> {
    a.check_same_shape(b)?;
    let grad = match op {
        GradientOperator::Sobel => sobel,
        GradientOperator::ForwardDifference => forward_difference,
    };
    let (ax, ay) = grad(a);
    let (bx, by) = grad(b);
    let n = ax.len() as f64;
    let sum: f64 = (0..ax.len())
        .map(|i| {
            let dx = ax[i] - bx[i];
            let dy = ay[i] - by[i];
            dx * dx + dy * dy
        })
        .sum();
    Ok(sum / n)
}

/// Mean gradient error with Sobel gradients.
pub fn gradient_loss_sobel(a: &Image, b: &Image) -> Result<f64> {
    gradient_loss(a, b, GradientOperator::Sobel)
}

/// Flare-detection loss: squared error plus squared gradient error.
pub fn fdn_loss(flare: &Image, flare_ref: &Image, op: GradientOperator) -> Result<f64> {
    Ok(mse_loss(flare, flare_ref)? + gradient_loss(flare, flare_ref, op)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dc_invariance() {
        let a = Image::from_fn(6, 7, 3, |y, x, c| ((y * 3 + x * 5 + c) % 7) as f32 / 7.0);
        assert_eq!(gradient_loss_sobel(&a, &a).unwrap(), 0.0);
        let shifted = a.map(|v| v + 0.25);
        assert!(gradient_loss_sobel(&shifted, &a).unwrap() < 1e-10);
    }

    #[test]
    fn ramp_interior_is_eight() {
        let ramp = Image::from_fn(5, 5, 1, |_, x, _| x as f32);
        let (gx, gy) = sobel(&ramp);
        assert_eq!(gx[2 * 5 + 2], 8.0);
        assert_eq!(gy[2 * 5 + 2], 0.0);
    }

    #[test]
    fn fdn_constant_offset() {
        let f = Image::from_fn(8, 8, 1, |y, x, _| ((y * x) % 5) as f32 / 5.0);
        let g = f.map(|v| v + 0.1);
        let loss = fdn_loss(&g, &f, GradientOperator::Sobel).unwrap();
        assert!((loss - 0.01).abs() < 1e-7, "{loss}");
        assert_eq!(fdn_loss(&f, &f, GradientOperator::ForwardDifference).unwrap(), 0.0);
    }

    #[test]
    fn forward_difference_ramp() {
        let ramp = Image::from_fn(3, 4, 1, |_, x, _| x as f32);
        let zero = Image::zeros(3, 4, 1);
        // Three of every four columns see slope 1; the clamped last column sees 0.
        let loss = gradient_loss(&ramp, &zero, GradientOperator::ForwardDifference).unwrap();
        assert!((loss - 0.75).abs() < 1e-12);
    }
}
