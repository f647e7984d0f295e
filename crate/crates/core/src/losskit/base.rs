use crate::error::{Error, Result};
use crate::imgcore::Image;

pub(crate) fn mean_of(a: &Image, b: &Image, f: impl Fn(f64) -> f64) -> Result<f64> {
    a.check_same_shape(b)?;
    let n = a.as_slice().len() as f64;
    Ok(a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| f(x as f64 - y as f64))
        .sum::<f64>()
        / n)
}

pub fn l1(a: &Image, b: &Image) -> Result<f64> {
    mean_of(a, b, f64::abs)
}

pub fn mse_loss(a: &Image, b: &Image) -> Result<f64> {
    mean_of(a, b, |d| d * d)
}

/// Huber-style smooth L1: `½d²/β` below `β`, `|d| − ½β` above.
pub fn smooth_l1(a: &Image, b: &Image, beta: f64) -> Result<f64> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::parameter(format!("smooth-L1 beta must be positive, got {beta}")));
    }
    mean_of(a, b, |d| {
        let ad = d.abs();
        if ad < beta {
            0.5 * d * d / beta
        } else {
            ad - 0.5 * beta
        }
    })
}

/// `mean √(d² + ε²)`.
pub fn charbonnier(a: &Image, b: &Image, eps: f64) -> Result<f64> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::parameter(format!("charbonnier eps must be positive, got {eps}")));
    }
    let e2 = eps * eps;
    mean_of(a, b, |d| (d * d + e2).sqrt())
}
