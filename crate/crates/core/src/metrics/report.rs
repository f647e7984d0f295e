use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{challenge_score, region_psnrs, RegionPsnrs, DEFAULT_PSNR_CAP};
use crate::datacli::io::{load_image, load_mask};
use crate::datacli::manifest::{roles, Manifest, ManifestRecord};
use crate::error::{Error, Result};
use crate::imgcore::Image;
use crate::regionmask::{extract_light_mask, MaskRole, RegionMask, DEFAULT_LIGHT_THRESHOLD, DEFAULT_SE_RADIUS};

/// One prediction with its reference and annotations.
#[derive(Debug, Clone)]
pub struct EvalSample {
    pub id: String,
    pub prediction: Image,
    pub ground_truth: Image,
    pub light: RegionMask,
    pub glare: RegionMask,
    pub streak: RegionMask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScore {
    pub id: String,
    pub s_psnr: Option<f64>,
    pub g_psnr: Option<f64>,
    pub global_psnr: Option<f64>,
    /// Set when the sample could not be scored; such rows never enter the means.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SampleScore {
    fn scored(id: String, r: RegionPsnrs) -> Self {
        Self {
            id,
            s_psnr: r.s_psnr,
            g_psnr: r.g_psnr,
            global_psnr: r.global_psnr,
            error: None,
        }
    }

    fn failed(id: String, error: &Error) -> Self {
        Self {
            id,
            s_psnr: None,
            g_psnr: None,
            global_psnr: None,
            error: Some(error.to_string()),
        }
    }

    pub fn is_failed(&self) -> bool {
        self.error.is_some()
    }

    pub fn score(&self) -> Option<f64> {
        RegionPsnrs {
            s_psnr: self.s_psnr,
            g_psnr: self.g_psnr,
            global_psnr: self.global_psnr,
        }
        .score()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub mean_s_psnr: Option<f64>,
    pub mean_g_psnr: Option<f64>,
    pub mean_global_psnr: Option<f64>,
    /// Mean of the available dataset means.
    pub score: Option<f64>,
    pub scored: usize,
    pub failed: usize,
    /// Scored samples lacking a streak / glare / global region.
    pub missing_s: usize,
    pub missing_g: usize,
    pub missing_global: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    /// Ordered by id.
    pub rows: Vec<SampleScore>,
    pub summary: ScoreSummary,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> (Option<f64>, usize) {
    let mut sum = 0.0;
    let mut n = 0usize;
    let mut missing = 0usize;
    for v in values {
        match v {
            Some(v) => {
                sum += v;
                n += 1;
            }
            None => missing += 1,
        }
    }
    ((n > 0).then(|| sum / n as f64), missing)
}

fn fmt2(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.2}")).unwrap_or_default()
}

impl ScoreReport {
    /// Builds the report; means are reduced in id order.
    pub fn from_rows(mut rows: Vec<SampleScore>) -> Self {
        rows.sort_by(|a, b| a.id.cmp(&b.id));
        let ok = || rows.iter().filter(|r| !r.is_failed());
        let (mean_s_psnr, missing_s) = mean(ok().map(|r| r.s_psnr));
        let (mean_g_psnr, missing_g) = mean(ok().map(|r| r.g_psnr));
        let (mean_global_psnr, missing_global) = mean(ok().map(|r| r.global_psnr));
        let score = match (mean_s_psnr, mean_g_psnr, mean_global_psnr) {
            (Some(s), Some(g), Some(gl)) => Some(challenge_score(s, g, gl)),
            partial => RegionPsnrs {
                s_psnr: partial.0,
                g_psnr: partial.1,
                global_psnr: partial.2,
            }
            .score(),
        };
        let failed = rows.iter().filter(|r| r.is_failed()).count();
        let summary = ScoreSummary {
            mean_s_psnr,
            mean_g_psnr,
            mean_global_psnr,
            score,
            scored: rows.len() - failed,
            failed,
            missing_s,
            missing_g,
            missing_global,
        };
        Self { rows, summary }
    }

    pub fn has_failures(&self) -> bool {
        self.summary.failed > 0
    }

    /// CSV with columns `id,s_psnr,g_psnr,global_psnr` (2 decimals) followed
    /// by a `#`-prefixed summary block. Absent metrics are empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,s_psnr,g_psnr,global_psnr\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.id,
                fmt2(r.s_psnr),
                fmt2(r.g_psnr),
                fmt2(r.global_psnr)
            );
        }
        let s = &self.summary;
        let _ = writeln!(out, "# summary");
        let _ = writeln!(out, "# mean_s_psnr,{}", fmt2(s.mean_s_psnr));
        let _ = writeln!(out, "# mean_g_psnr,{}", fmt2(s.mean_g_psnr));
        let _ = writeln!(out, "# mean_global_psnr,{}", fmt2(s.mean_global_psnr));
        let _ = writeln!(out, "# score,{}", fmt2(s.score));
        let _ = writeln!(out, "# scored,{}", s.scored);
        let _ = writeln!(out, "# failed,{}", s.failed);
        let _ = writeln!(
            out,
            "# missing_regions,s={},g={},global={}",
            s.missing_s, s.missing_g, s.missing_global
        );
        for r in self.rows.iter().filter(|r| r.is_failed()) {
            let _ = writeln!(out, "# failed_id,{}", r.id);
        }
        out
    }

    /// Full-precision JSON mirror of the report.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Per-sample table ordered by sample score, best first.
    pub fn table(&self) -> String {
        let mut rows: Vec<&SampleScore> = self.rows.iter().collect();
        rows.sort_by(|a, b| {
            let (sa, sb) = (a.score().unwrap_or(f64::NEG_INFINITY), b.score().unwrap_or(f64::NEG_INFINITY));
            sb.partial_cmp(&sa).unwrap_or(Ordering::Equal).then_with(|| a.id.cmp(&b.id))
        });
        let mut out = format!(
            "{:<24} {:>8} {:>8} {:>8} {:>8}\n",
            "id", "score", "S-PSNR", "G-PSNR", "PSNR"
        );
        for r in rows {
            if let Some(e) = &r.error {
                let _ = writeln!(out, "{:<24} failed: {e}", r.id);
                continue;
            }
            let _ = writeln!(
                out,
                "{:<24} {:>8} {:>8} {:>8} {:>8}",
                r.id,
                fmt2(r.score()),
                fmt2(r.s_psnr),
                fmt2(r.g_psnr),
                fmt2(r.global_psnr)
            );
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "{:<24} {:>8} {:>8} {:>8} {:>8}",
            "mean",
            fmt2(s.score),
            fmt2(s.mean_s_psnr),
            fmt2(s.mean_g_psnr),
            fmt2(s.mean_global_psnr)
        );
        out
    }
}

/// Leaderboard over several runs: sorted by score (descending) with the
/// per-column rank in parentheses.
pub fn leaderboard_table(runs: &[(String, ScoreReport)]) -> String {
    let key = |r: &ScoreReport, col: usize| {
        match col {
            0 => r.summary.score,
            1 => r.summary.mean_s_psnr,
            2 => r.summary.mean_g_psnr,
            _ => r.summary.mean_global_psnr,
        }
        .unwrap_or(f64::NEG_INFINITY)
    };
    let rank = |i: usize, col: usize| {
        let v = key(&runs[i].1, col);
        1 + runs.iter().filter(|(_, r)| key(r, col) > v).count()
    };
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&a, &b| {
        key(&runs[b].1, 0)
            .partial_cmp(&key(&runs[a].1, 0))
            .unwrap_or(Ordering::Equal)
            .then_with(|| runs[a].0.cmp(&runs[b].0))
    });
    let mut out = format!(
        "{:<24} {:>12} {:>12} {:>12} {:>12}\n",
        "run", "Score", "S-PSNR", "G-PSNR", "PSNR"
    );
    for i in order {
        let s = &runs[i].1.summary;
        let cell = |v: Option<f64>, col: usize| format!("{}({})", fmt2(v), rank(i, col));
        let _ = writeln!(
            out,
            "{:<24} {:>12} {:>12} {:>12} {:>12}",
            runs[i].0,
            cell(s.score, 0),
            cell(s.mean_s_psnr, 1),
            cell(s.mean_g_psnr, 2),
            cell(s.mean_global_psnr, 3)
        );
    }
    out
}

/// Scores in-memory samples. Samples are scored in parallel; the reduction
/// order is fixed by id.
pub fn evaluate_samples(samples: &[EvalSample], cap: f64) -> Result<ScoreReport> {
    if samples.is_empty() {
        return Err(Error::parameter("nothing to evaluate: no samples"));
    }
    let rows = samples
        .par_iter()
        .map(|s| {
            match region_psnrs(&s.prediction, &s.ground_truth, &s.light, &s.glare, &s.streak, cap) {
                Ok(r) => SampleScore::scored(s.id.clone(), r),
                Err(e) => SampleScore::failed(s.id.clone(), &e),
            }
        })
        .collect();
    Ok(ScoreReport::from_rows(rows))
}

fn mask_or_empty(
    manifest: &Manifest,
    rec: &ManifestRecord,
    role: &str,
    mask_role: MaskRole,
    h: usize,
    w: usize,
) -> Result<RegionMask> {
    match manifest.resolve(rec, role) {
        Some(p) => load_mask(&p, mask_role),
        None => Ok(RegionMask::empty(h, w, mask_role)),
    }
}

/// How [`evaluate_run`] scores records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub cap: f64,
    /// Used to derive a light-source mask from the record's corrupted input
    /// when no `light_mask` path is listed.
    pub light_threshold: f32,
    pub se_radius: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_PSNR_CAP,
            light_threshold: DEFAULT_LIGHT_THRESHOLD,
            se_radius: DEFAULT_SE_RADIUS,
        }
    }
}

fn light_mask_for(manifest: &Manifest, rec: &ManifestRecord, opts: &RunOptions, h: usize, w: usize) -> Result<RegionMask> {
    if let Some(p) = manifest.resolve(rec, roles::LIGHT_MASK) {
        return load_mask(&p, MaskRole::LightSource);
    }
    match manifest.resolve(rec, roles::CORRUPTED) {
        Some(p) => extract_light_mask(&load_image(&p)?, opts.light_threshold, opts.se_radius),
        None => Ok(RegionMask::empty(h, w, MaskRole::LightSource)),
    }
}

fn score_record(pred_dir: &Path, manifest: &Manifest, rec: &ManifestRecord, opts: &RunOptions) -> Result<RegionPsnrs> {
    let gt_path = manifest
        .resolve(rec, roles::CLEAN)
        .ok_or_else(|| Error::parameter(format!("record `{}` lacks a `clean` path", rec.id)))?;
    let gt = load_image(&gt_path)?;
    let pred = load_image(&pred_dir.join(format!("{}.png", rec.id)))?;
    let (h, w) = (gt.height(), gt.width());
    let light = light_mask_for(manifest, rec, opts, h, w)?;
    let glare = mask_or_empty(manifest, rec, roles::GLARE_MASK, MaskRole::Glare, h, w)?;
    let streak = mask_or_empty(manifest, rec, roles::STREAK_MASK, MaskRole::Streak, h, w)?;
    region_psnrs(&pred, &gt, &light, &glare, &streak, opts.cap)
}

/// Scores every manifest record against `<pred_dir>/<id>.png`.
///
/// Unreadable or mismatched predictions become failed rows and are left out
/// of the means; callers should treat [`ScoreReport::has_failures`] as a
/// non-zero exit.
pub fn evaluate_run(pred_dir: &Path, gt_manifest: &Manifest, opts: &RunOptions) -> Result<ScoreReport> {
    if gt_manifest.records.is_empty() {
        return Err(Error::parameter("ground-truth manifest is empty"));
    }
    let rows = gt_manifest
        .records
        .par_iter()
        .map(|rec| match score_record(pred_dir, gt_manifest, rec, opts) {
            Ok(r) => SampleScore::scored(rec.id.clone(), r),
            Err(e) => {
                log::error!("{}: {e}", rec.id);
                SampleScore::failed(rec.id.clone(), &e)
            }
        })
        .collect();
    Ok(ScoreReport::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, s: Option<f64>, g: Option<f64>, gl: Option<f64>) -> SampleScore {
        SampleScore {
            id: id.into(),
            s_psnr: s,
            g_psnr: g,
            global_psnr: gl,
            error: None,
        }
    }

    #[test]
    fn summary_means_in_id_order() {
        let rep = ScoreReport::from_rows(vec![
            row("b", Some(20.0), Some(30.0), Some(40.0)),
            row("a", None, Some(10.0), Some(20.0)),
            SampleScore {
                error: Some("missing".into()),
                ..row("c", None, None, None)
            },
        ]);
        assert_eq!(rep.rows[0].id, "a");
        let s = &rep.summary;
        assert_eq!(s.mean_s_psnr, Some(20.0));
        assert_eq!(s.mean_g_psnr, Some(20.0));
        assert_eq!(s.mean_global_psnr, Some(30.0));
        assert_eq!(s.score, Some(challenge_score(20.0, 20.0, 30.0)));
        assert_eq!((s.scored, s.failed, s.missing_s), (2, 1, 1));
        assert!(rep.has_failures());
    }

    #[test]
    fn csv_layout() {
        let rep = ScoreReport::from_rows(vec![row("x", Some(28.591), None, Some(30.0))]);
        let csv = rep.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("id,s_psnr,g_psnr,global_psnr"));
        assert_eq!(lines.next(), Some("x,28.59,,30.00"));
        assert!(csv.contains("# score,29.30"));
    }

    #[test]
    fn json_round_trip() {
        let rep = ScoreReport::from_rows(vec![row("x", Some(1.0 / 3.0), Some(2.0), None)]);
        let back: ScoreReport = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn leaderboard_ranks() {
        let a = ScoreReport::from_rows(vec![row("1", Some(28.59), Some(28.89), Some(30.84))]);
        let b = ScoreReport::from_rows(vec![row("1", Some(28.21), Some(28.59), Some(30.68))]);
        let t = leaderboard_table(&[("second".into(), b), ("first".into(), a)]);
        let lines: Vec<&str> = t.lines().collect();
        assert!(lines[1].starts_with("first"));
        assert!(lines[1].contains("29.44(1)"));
        assert!(lines[2].contains("(2)"));
    }

    #[test]
    fn empty_samples_rejected() {
        assert!(evaluate_samples(&[], 100.0).is_err());
    }
}
