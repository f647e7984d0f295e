//! Challenge scoring: masked PSNR, region PSNRs with light-source exclusion,
//! SSIM and the averaged challenge score.

mod report;
mod ssim;

use crate::error::{Error, Result};
use crate::imgcore::Image;
use crate::regionmask::{mask_and, mask_complement, MaskRole, RegionMask};

pub use self::report::{
    evaluate_run, evaluate_samples, leaderboard_table, EvalSample, RunOptions, SampleScore, ScoreReport,
    ScoreSummary,
};
pub use self::ssim::{ssim, SSIM_C1, SSIM_C2, SSIM_SIGMA, SSIM_WINDOW};

/// PSNR reported for a (near) perfect match.
pub const DEFAULT_PSNR_CAP: f64 = 100.0;
/// MSE below which PSNR is reported as the cap.
pub const MSE_FLOOR: f64 = 1e-10;
/// Annotation masks are hard-thresholded at this weight before scoring.
pub const ANNOTATION_CUT: f32 = 0.5;

/// `Σ m·(a−b)² / (C·Σ m)`; every pixel weighs 1 without a mask.
pub fn mse(a: &Image, b: &Image, mask: Option<&RegionMask>) -> Result<f64> {
    a.check_same_shape(b)?;
    if let Some(m) = mask {
        a.check_mask(m)?;
    }
    let c = a.channels();
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (p, (pa, pb)) in a
        .as_slice()
        .chunks_exact(c)
        .zip(b.as_slice().chunks_exact(c))
        .enumerate()
    {
        let w = mask.map_or(1.0, |m| m.weights()[p] as f64);
        let mut sq = 0.0f64;
        for (&x, &y) in pa.iter().zip(pb) {
            let d = x as f64 - y as f64;
            sq += d * d;
        }
        num += w * sq;
        den += w;
    }
    if den <= 0.0 {
        return Err(Error::EmptyRegion);
    }
    Ok(num / (c as f64 * den))
}

/// PSNR for peak value 1, capped at `cap` dB.
pub fn psnr(a: &Image, b: &Image, mask: Option<&RegionMask>, cap: f64) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b, mask)?, cap))
}

pub fn psnr_from_mse(mse: f64, cap: f64) -> f64 {
    if mse < MSE_FLOOR {
        cap
    } else {
        (10.0 * (1.0 / mse).log10()).min(cap)
    }
}

/// The three challenge metrics for one sample. `None` marks an empty
/// evaluation region.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RegionPsnrs {
    pub s_psnr: Option<f64>,
    pub g_psnr: Option<f64>,
    pub global_psnr: Option<f64>,
}

impl RegionPsnrs {
    /// Mean of whichever metrics are present.
    pub fn score(&self) -> Option<f64> {
        let present: Vec<f64> = [self.s_psnr, self.g_psnr, self.global_psnr]
            .into_iter()
            .flatten()
            .collect();
        (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
    }
}

fn region_psnr(pred: &Image, gt: &Image, region: &RegionMask, cap: f64, name: &str) -> Result<Option<f64>> {
    match psnr(pred, gt, Some(region), cap) {
        Ok(v) => Ok(Some(v)),
        Err(Error::EmptyRegion) => {
            log::warn!("{name} region is empty; metric excluded");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// S-PSNR over streak∖light, G-PSNR over glare∖light and global PSNR over
/// everything outside the light source. Annotations are binarized first.
pub fn region_psnrs(
    pred: &Image,
    gt: &Image,
    light: &RegionMask,
    glare: &RegionMask,
    streak: &RegionMask,
    cap: f64,
) -> Result<RegionPsnrs> {
    pred.check_same_shape(gt)?;
    for m in [light, glare, streak] {
        pred.check_mask(m)?;
    }
    let outside_light = mask_complement(&light.binarize(ANNOTATION_CUT)).with_role(MaskRole::Custom);
    let streak_region = mask_and(&streak.binarize(ANNOTATION_CUT), &outside_light)?;
    let glare_region = mask_and(&glare.binarize(ANNOTATION_CUT), &outside_light)?;
    Ok(RegionPsnrs {
        s_psnr: region_psnr(pred, gt, &streak_region, cap, "streak")?,
        g_psnr: region_psnr(pred, gt, &glare_region, cap, "glare")?,
        global_psnr: region_psnr(pred, gt, &outside_light, cap, "global")?,
    })
}

/// Final challenge score: the mean of S-PSNR, G-PSNR and global PSNR.
pub fn challenge_score(s_psnr: f64, g_psnr: f64, global_psnr: f64) -> f64 {
    (s_psnr + g_psnr + global_psnr) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(h: usize, w: usize, c: usize, seed: u32) -> Image {
        let mut s = seed.wrapping_mul(2654435761).wrapping_add(12345);
        Image::from_fn(h, w, c, |_, _, _| {
            s = s.wrapping_mul(1664525).wrapping_add(1013904223);
            (s >> 8) as f32 / (1u32 << 24) as f32
        })
    }

    #[test]
    fn mse_basics() {
        let a = img(4, 4, 3, 1);
        assert_eq!(mse(&a, &a, None).unwrap(), 0.0);
        let b = Image::filled(4, 4, 3, 0.5);
        let shifted = b.map(|v| v + 0.1);
        assert!((mse(&shifted, &b, None).unwrap() - 0.01).abs() < 1e-8);
        assert!((psnr(&shifted, &b, None, 100.0).unwrap() - 20.0).abs() < 1e-5);
        assert_eq!(psnr(&a, &a, None, DEFAULT_PSNR_CAP).unwrap(), 100.0);
    }

    #[test]
    fn mse_masked_hand_sum() {
        let a = Image::new(2, 2, 1, vec![0.1, 0.9, 0.4, 0.3]).unwrap();
        let b = Image::new(2, 2, 1, vec![0.2, 0.5, 0.4, 0.8]).unwrap();
        let m = RegionMask::new(2, 2, MaskRole::Custom, vec![1.0, 1.0, 1.0, 0.0]).unwrap();
        let d = |x: f32, y: f32| (x as f64 - y as f64).powi(2);
        let expected = (d(0.1, 0.2) + d(0.9, 0.5) + d(0.4, 0.4)) / 3.0;
        assert!((mse(&a, &b, Some(&m)).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn empty_region_is_an_error() {
        let a = img(3, 3, 1, 2);
        let m = RegionMask::empty(3, 3, MaskRole::Custom);
        assert!(matches!(mse(&a, &a, Some(&m)), Err(Error::EmptyRegion)));
    }

    #[test]
    fn all_ones_mask_is_bitwise_unmasked() {
        let a = img(9, 7, 3, 3);
        let b = img(9, 7, 3, 4);
        let ones = RegionMask::full(9, 7, MaskRole::Custom);
        assert_eq!(
            psnr(&a, &b, None, 100.0).unwrap().to_bits(),
            psnr(&a, &b, Some(&ones), 100.0).unwrap().to_bits()
        );
    }

    #[test]
    fn symmetric() {
        let a = img(8, 8, 3, 5);
        let b = img(8, 8, 3, 6);
        assert_eq!(
            psnr(&a, &b, None, 100.0).unwrap(),
            psnr(&b, &a, None, 100.0).unwrap()
        );
    }

    #[test]
    fn region_identity_and_degenerate() {
        let gt = img(8, 8, 3, 7);
        let empty = RegionMask::empty(8, 8, MaskRole::LightSource);
        let full = RegionMask::full(8, 8, MaskRole::Glare);
        let r = region_psnrs(&gt, &gt, &empty, &full, &full, 100.0).unwrap();
        assert_eq!(
            (r.s_psnr, r.g_psnr, r.global_psnr),
            (Some(100.0), Some(100.0), Some(100.0))
        );
        let pred = img(8, 8, 3, 8);
        let plain = psnr(&pred, &gt, None, 100.0).unwrap();
        let r = region_psnrs(&pred, &gt, &empty, &full, &full, 100.0).unwrap();
        assert_eq!(r.s_psnr, Some(plain));
        assert_eq!(r.g_psnr, Some(plain));
        assert_eq!(r.global_psnr, Some(plain));
    }

    #[test]
    fn quadrant_regions() {
        // light = top-left, glare = top-right, streak = bottom-left.
        let gt = Image::zeros(8, 8, 1);
        let err = |y: usize, x: usize| match (y < 4, x < 4) {
            (true, true) => 0.5,
            (true, false) => 0.1,
            (false, true) => 0.2,
            (false, false) => 0.05,
        };
        let pred = Image::from_fn(8, 8, 1, |y, x, _| err(y, x));
        let q = |top: bool, left: bool| {
            RegionMask::from_predicate(8, 8, MaskRole::Custom, move |y, x| {
                (y < 4) == top && (x < 4) == left
            })
        };
        let light = q(true, true);
        let glare = q(true, false);
        let streak = q(false, true);
        let r = region_psnrs(&pred, &gt, &light, &glare, &streak, 100.0).unwrap();
        let db = |m: f64| 10.0 * (1.0 / m).log10();
        let sq = |v: f32| (v as f64).powi(2);
        assert!((r.g_psnr.unwrap() - db(sq(0.1))).abs() < 1e-9);
        assert!((r.s_psnr.unwrap() - db(sq(0.2))).abs() < 1e-9);
        let global = (sq(0.1) + sq(0.2) + sq(0.05)) / 3.0;
        assert!((r.global_psnr.unwrap() - db(global)).abs() < 1e-9);
    }

    #[test]
    fn light_overlapping_streak_is_absent() {
        let gt = Image::zeros(4, 4, 1);
        let light = RegionMask::from_predicate(4, 4, MaskRole::LightSource, |y, _| y < 2);
        let streak = RegionMask::from_predicate(4, 4, MaskRole::Streak, |y, _| y < 2);
        let glare = RegionMask::full(4, 4, MaskRole::Glare);
        let r = region_psnrs(&gt, &gt, &light, &glare, &streak, 100.0).unwrap();
        assert_eq!(r.s_psnr, None);
        assert_eq!(r.score(), Some(100.0));
    }

    #[test]
    fn score_arithmetic() {
        assert_eq!(challenge_score(27.5, 27.5, 27.5), 27.5);
        assert_eq!(challenge_score(0.0, 0.0, 3.0), 1.0);
        assert!((challenge_score(28.59, 28.89, 30.84) - 29.44).abs() < 1e-9);
    }
}
