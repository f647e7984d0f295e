//! Subcommands. Exit status: 0 success, 1 invalid arguments or data,
//! 2 unreadable or unwritable files.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::assets::FileAssets;
use super::config::RunConfig;
use super::io::{load_image, load_mask, save_image, save_mask, BitDepth};
use super::manifest::{load_manifest, roles, write_manifest, Manifest, ManifestRecord};
use crate::error::{Error, Result};
use crate::imgcore::Image;
use crate::losskit::{self, GradientOperator, IdentityFeatures, LossWeights};
use crate::metrics::{evaluate_run, leaderboard_table, ssim, RunOptions, ScoreReport};
use crate::postproc::{blend_back_light_source, blend_back_light_source_feathered, blend_with_input};
use crate::regionmask::{
    extract_light_mask, flare_mask_from_flare_image, soft_attention, MaskRole, RegionMask,
    DEFAULT_FLARE_TAU, DEFAULT_LIGHT_THRESHOLD, DEFAULT_SE_RADIUS,
};
use crate::synth::{synthesize_dataset, SamplePair, Selection};

/// Overrides the worker count when `--threads` is not given.
pub const THREADS_ENV: &str = "FLAREBENCH_THREADS";

/// Name of the manifest written by `synth`.
pub const MANIFEST_NAME: &str = "manifest.jsonl";

#[derive(Debug, Parser)]
#[command(name = "flarebench", version, about = "Lens-flare benchmark toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize flare-corrupted / flare-free pairs with their masks.
    Synth(SynthArgs),
    /// Score one or more prediction directories against a manifest.
    Score(ScoreArgs),
    /// Extract a light-source or flare mask from an image.
    Mask(MaskArgs),
    /// Blend a prediction with its input.
    Blend(BlendArgs),
    /// Evaluate a loss kernel on image operands and print the value.
    Loss(LossArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Text file listing background images, one path per line.
    #[arg(long)]
    pub backgrounds: PathBuf,
    /// Text file listing flare images; optional tab-separated light, glare
    /// and streak annotation paths may follow each flare.
    #[arg(long)]
    pub flares: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Number of pairs to synthesize.
    #[arg(long)]
    pub count: usize,
    /// Dataset seed; overrides the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Bit depth of the written images.
    #[arg(long, value_enum, default_value = "16")]
    pub bit_depth: BitDepth,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Prediction directory holding `<id>.png`, optionally as `NAME=DIR`.
    /// Repeat to rank several runs.
    #[arg(long, required = true)]
    pub pred: Vec<String>,
    /// Ground-truth manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output prefix; writes `<out>.csv` and `<out>.json` (one pair per run
    /// suffixed `_<NAME>` when several runs are scored).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Light-source threshold used when a record has no `light_mask`.
    #[arg(long)]
    pub threshold: Option<f32>,
    /// Opening radius used with `--threshold`.
    #[arg(long)]
    pub se_radius: Option<usize>,
    /// PSNR ceiling in dB.
    #[arg(long)]
    pub cap: Option<f64>,
    /// `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaskKind {
    /// Saturated emitters: darkest channel at or above the threshold, opened.
    Light,
    /// Any channel of a flare-only image at or above `--tau`.
    Flare,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output 8-bit mask PNG.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "light")]
    pub kind: MaskKind,
    #[arg(long, default_value_t = DEFAULT_LIGHT_THRESHOLD)]
    pub threshold: f32,
    #[arg(long, default_value_t = DEFAULT_SE_RADIUS)]
    pub se_radius: usize,
    #[arg(long, default_value_t = DEFAULT_FLARE_TAU)]
    pub tau: f32,
    /// Write the soft attention map `sigmoid(gain * (m - 0.5))` instead.
    #[arg(long)]
    pub attention_gain: Option<f32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BlendMode {
    /// Copy the input inside its light-source mask.
    Lightsource,
    /// `alpha * pred + (1 - alpha) * input`.
    Ratio,
}

#[derive(Debug, Args)]
pub struct BlendArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "lightsource")]
    pub mode: BlendMode,
    /// Prediction weight for `--mode ratio`.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f32,
    #[arg(long, default_value_t = DEFAULT_LIGHT_THRESHOLD)]
    pub threshold: f32,
    #[arg(long, default_value_t = DEFAULT_SE_RADIUS)]
    pub se_radius: usize,
    /// Odd Gaussian kernel softening the light-source mask edge.
    #[arg(long)]
    pub feather: Option<usize>,
    #[arg(long, value_enum, default_value = "16")]
    pub bit_depth: BitDepth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossKernel {
    /// a b
    L1,
    /// a b
    Mse,
    /// a b (weight `smooth_l1_beta`)
    SmoothL1,
    /// a b (weight `charbonnier_eps`)
    Charbonnier,
    /// a b, Sobel gradients
    Gradient,
    /// flare flare_ref
    Fdn,
    /// a b
    Frequency,
    /// pred gt (weight `lvgroup.frequency`)
    Lvgroup,
    /// a b, prints SSIM
    Ssim,
    /// content_pred flare_pred clean flare
    Megfr,
    /// anchor positive negative (weights `actionbrain.*`)
    Actionbrain,
    /// pred_1 .. pred_k reference (weights `recurrent.gammas`)
    Recurrent,
    /// pred_mask_1 flare_mask_1 .. (weight `recurrent.mask_lambda`)
    Mask,
    /// pred gt flare_mask (weights `antins.*`)
    Antins,
    /// pred clean light_mask non_flare_mask, L1 on both composites
    GlobalRegional,
    /// no operands; `--terms smooth,perceptual,mge,adversarial`
    Usask,
    /// no operands; `--terms flare,light_source,reconstruction`
    Cevi,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    #[arg(value_enum)]
    pub kernel: LossKernel,
    /// Operand image paths, in the order listed for the kernel.
    pub operands: Vec<PathBuf>,
    /// Weight override such as `usask.alpha=0.02`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Precomputed scalar terms for `usask` and `cevi`, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub terms: Vec<f64>,
    /// Weight of the global term for `global-regional`.
    #[arg(long, default_value_t = 1.0)]
    pub global_weight: f64,
    /// Weight of the regional term for `global-regional`.
    #[arg(long, default_value_t = 1.0)]
    pub regional_weight: f64,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit status.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command. `Ok` carries the exit status for runs that
/// completed with per-sample failures.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Synth(a) => synth(&a),
        Command::Score(a) => score(&a),
        Command::Mask(a) => mask(&a).map(|_| 0),
        Command::Blend(a) => blend(&a).map(|_| 0),
        Command::Loss(a) => {
            println!("{}", loss(&a)?);
            Ok(0)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

/// Worker count: the flag, then the environment, then the config file.
/// `0` means all cores.
pub fn resolve_threads(flag: Option<usize>, config: Option<usize>) -> Result<usize> {
    if let Some(n) = flag {
        return Ok(n);
    }
    if let Ok(v) = std::env::var(THREADS_ENV) {
        return v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV}: expected a thread count, got `{v}`")));
    }
    Ok(config.unwrap_or(0))
}

fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Identifier of synthesized sample `index`.
pub fn sample_id(index: usize) -> String {
    format!("{index:06}")
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn write_sample(
    out: &Path,
    assets: &FileAssets,
    depth: BitDepth,
    index: usize,
    pair: SamplePair,
    sel: Selection,
) -> Result<ManifestRecord> {
    let id = sample_id(index);
    let mut rec = ManifestRecord::new(&id);
    let images = [
        (roles::CORRUPTED, &pair.corrupted),
        (roles::CLEAN, &pair.clean),
        (roles::FLARE, &pair.flare),
    ];
    for (role, img) in images {
        let name = format!("{id}_{role}.png");
        save_image(img, &out.join(&name), depth)?;
        rec.paths.insert(role.to_string(), name);
    }
    let masks = [
        (roles::LIGHT_MASK, &pair.light_mask),
        (roles::GLARE_MASK, &pair.glare_mask),
        (roles::STREAK_MASK, &pair.streak_mask),
    ];
    for (role, m) in masks {
        let name = format!("{id}_{role}.png");
        save_mask(m, &out.join(&name))?;
        rec.paths.insert(role.to_string(), name);
    }
    let mut params = serde_json::to_value(&pair.params).expect("params serialize");
    params["background"] = file_name(&assets.backgrounds[sel.background]).into();
    params["flare_files"] = sel
        .flares
        .iter()
        .map(|&i| file_name(&assets.flares[i].flare))
        .collect::<Vec<_>>()
        .into();
    params["selection"] = serde_json::to_value(&sel).expect("selection serialize");
    rec.sample_seed = Some(pair.sample_seed);
    rec.params = Some(params);
    Ok(rec)
}

fn synth(a: &SynthArgs) -> Result<i32> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(seed) = a.seed {
        cfg.synth.seed = seed;
    }
    cfg.validate()?;
    let assets = FileAssets::from_lists(&a.backgrounds, &a.flares)?;
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let manifest_path = a.out.join(MANIFEST_NAME);
    if a.count == 0 {
        write_manifest(&Manifest::default(), &manifest_path)?;
        return Ok(0);
    }
    let threads = resolve_threads(a.threads, cfg.threads)?;
    let results = with_pool(threads, || {
        synthesize_dataset(&assets, &cfg.synth, a.count, |i, pair, sel| {
            write_sample(&a.out, &assets, a.bit_depth, i, pair, sel)
        })
    })??;
    let mut code = 0;
    let mut records = Vec::with_capacity(results.len());
    for r in results {
        match r.outcome {
            Ok(rec) => records.push(rec),
            Err(e) => code = code.max(e.exit_code()),
        }
    }
    let written = records.len();
    write_manifest(&Manifest::new(&a.out, records)?, &manifest_path)?;
    if code != 0 {
        eprintln!("error: {} of {} samples failed", a.count - written, a.count);
    }
    Ok(code)
}

fn split_run(arg: &str) -> (String, PathBuf) {
    match arg.split_once('=') {
        Some((name, dir)) if !name.is_empty() => (name.to_string(), PathBuf::from(dir)),
        _ => {
            let dir = PathBuf::from(arg);
            (file_name(&dir), dir)
        }
    }
}

fn write_report(rep: &ScoreReport, prefix: &Path) -> Result<()> {
    let with_ext = |ext: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(ext);
        PathBuf::from(s)
    };
    let csv = with_ext(".csv");
    fs::write(&csv, rep.to_csv()).map_err(|e| Error::io(&csv, e))?;
    let json = with_ext(".json");
    fs::write(&json, rep.to_json()).map_err(|e| Error::io(&json, e))
}

fn score(a: &ScoreArgs) -> Result<i32> {
    let cfg = load_config(a.config.as_deref())?;
    let opts = RunOptions {
        cap: a.cap.unwrap_or(cfg.psnr_cap),
        light_threshold: a.threshold.unwrap_or(cfg.synth.masks.light_threshold),
        se_radius: a.se_radius.unwrap_or(cfg.synth.masks.se_radius),
    };
    if !(opts.cap.is_finite() && opts.cap > 0.0) {
        return Err(Error::parameter(format!("cap must be positive, got {}", opts.cap)));
    }
    if !(opts.light_threshold > 0.0 && opts.light_threshold <= 1.0) {
        return Err(Error::parameter("threshold must lie in (0, 1]"));
    }
    let manifest = load_manifest(&a.manifest)?;
    manifest.validate_paths()?;
    let threads = resolve_threads(a.threads, cfg.threads)?;
    let runs: Vec<(String, PathBuf)> = a.pred.iter().map(|s| split_run(s)).collect();
    let mut reports = Vec::with_capacity(runs.len());
    for (name, dir) in &runs {
        if !dir.is_dir() {
            return Err(Error::io(
                dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "prediction directory not found"),
            ));
        }
        let rep = with_pool(threads, || evaluate_run(dir, &manifest, &opts))??;
        reports.push((name.clone(), rep));
    }
    let mut code = 0;
    for (name, rep) in &reports {
        if let Some(prefix) = &a.out {
            if reports.len() == 1 {
                write_report(rep, prefix)?;
            } else {
                let mut p = prefix.as_os_str().to_owned();
                p.push(format!("_{name}"));
                write_report(rep, Path::new(&p))?;
            }
        }
        if rep.has_failures() {
            eprintln!("error: {name}: {} prediction(s) could not be scored", rep.summary.failed);
            code = 2;
        }
    }
    if reports.len() == 1 {
        print!("{}", reports[0].1.table());
    } else {
        print!("{}", leaderboard_table(&reports));
    }
    Ok(code)
}

fn mask(a: &MaskArgs) -> Result<()> {
    let img = load_image(&a.input)?;
    let mut m = match a.kind {
        MaskKind::Light => extract_light_mask(&img, a.threshold, a.se_radius)?,
        MaskKind::Flare => flare_mask_from_flare_image(&img, a.tau),
    };
    if let Some(gain) = a.attention_gain {
        m = soft_attention(&m, gain)?;
    }
    save_mask(&m, &a.out)
}

fn blend(a: &BlendArgs) -> Result<()> {
    let pred = load_image(&a.pred)?;
    let input = load_image(&a.input)?;
    let out = match (a.mode, a.feather) {
        (BlendMode::Lightsource, None) => blend_back_light_source(&pred, &input, a.threshold, a.se_radius)?,
        (BlendMode::Lightsource, Some(k)) => {
            blend_back_light_source_feathered(&pred, &input, a.threshold, a.se_radius, k)?
        }
        (BlendMode::Ratio, _) => blend_with_input(&pred, &input, a.alpha)?,
    };
    save_image(&out, &a.out, a.bit_depth)
}

fn arity(kernel: LossKernel, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::parameter(format!(
            "{kernel:?} takes {want} operand(s), got {got}"
        )));
    }
    Ok(())
}

fn terms(kernel: LossKernel, t: &[f64], want: usize) -> Result<()> {
    if t.len() != want {
        return Err(Error::parameter(format!(
            "{kernel:?} takes {want} --terms value(s), got {}",
            t.len()
        )));
    }
    Ok(())
}

fn masks(paths: &[PathBuf], role: MaskRole) -> Result<Vec<RegionMask>> {
    paths.iter().map(|p| load_mask(p, role)).collect()
}

/// Evaluates a loss kernel. Exposed for callers that want the value
/// without going through stdout.
pub fn loss(a: &LossArgs) -> Result<f64> {
    let mut w = LossWeights::default();
    for o in &a.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{o}` is not KEY=VALUE")))?;
        w.set(k.trim(), v.trim())?;
    }
    let k = a.kernel;
    let n = a.operands.len();
    let fx = IdentityFeatures;
    let images = |want: usize| -> Result<Vec<Image>> {
        arity(k, n, want)?;
        a.operands.iter().map(|p| load_image(p)).collect()
    };
    Ok(match k {
        LossKernel::L1 => {
            let v = images(2)?;
            losskit::l1(&v[0], &v[1])?
        }
        LossKernel::Mse => {
            let v = images(2)?;
            losskit::mse_loss(&v[0], &v[1])?
        }
        LossKernel::SmoothL1 => {
            let v = images(2)?;
            losskit::smooth_l1(&v[0], &v[1], w.smooth_l1_beta)?
        }
        LossKernel::Charbonnier => {
            let v = images(2)?;
            losskit::charbonnier(&v[0], &v[1], w.charbonnier_eps)?
        }
        LossKernel::Gradient => {
            let v = images(2)?;
            losskit::gradient_loss_sobel(&v[0], &v[1])?
        }
        LossKernel::Fdn => {
            let v = images(2)?;
            losskit::fdn_loss(&v[0], &v[1], GradientOperator::Sobel)?
        }
        LossKernel::Frequency => {
            let v = images(2)?;
            losskit::frequency_reconstruction_loss(&v[0], &v[1])?
        }
        LossKernel::Lvgroup => {
            let v = images(2)?;
            losskit::lvgroup_loss(&v[0], &v[1], w.lvgroup.frequency)?
        }
        LossKernel::Ssim => {
            let v = images(2)?;
            ssim(&v[0], &v[1])?
        }
        LossKernel::Megfr => {
            let v = images(4)?;
            losskit::megfr_separation_loss(&v[0], &v[1], &v[2], &v[3], &fx)?
        }
        LossKernel::Actionbrain => {
            let v = images(3)?;
            losskit::actionbrain_loss(&v[0], &v[1], &v[2], &w.actionbrain, &fx)?
        }
        LossKernel::Recurrent => {
            if n < 2 {
                return Err(Error::parameter("recurrent takes at least one prediction and a reference"));
            }
            let v = images(n)?;
            let (preds, reference) = v.split_at(n - 1);
            losskit::recurrent_reconstruction_loss(preds, &reference[0], &w.recurrent.gammas, &fx)?
        }
        LossKernel::Mask => {
            if n == 0 || !n.is_multiple_of(2) {
                return Err(Error::parameter("mask takes pairs of pred_mask flare_mask operands"));
            }
            let preds: Vec<PathBuf> = a.operands.iter().step_by(2).cloned().collect();
            let flares: Vec<PathBuf> = a.operands.iter().skip(1).step_by(2).cloned().collect();
            losskit::mask_loss(
                &masks(&preds, MaskRole::Custom)?,
                &masks(&flares, MaskRole::Flare)?,
                w.recurrent.mask_lambda,
            )?
        }
        LossKernel::Antins => {
            arity(k, n, 3)?;
            let pred = load_image(&a.operands[0])?;
            let gt = load_image(&a.operands[1])?;
            let m = load_mask(&a.operands[2], MaskRole::Flare)?;
            losskit::weighted_region_l1(&pred, &gt, &m, w.antins.inside, w.antins.outside)?
        }
        LossKernel::GlobalRegional => {
            arity(k, n, 4)?;
            let pred = load_image(&a.operands[0])?;
            let clean = load_image(&a.operands[1])?;
            let light = load_mask(&a.operands[2], MaskRole::LightSource)?;
            let non_flare = load_mask(&a.operands[3], MaskRole::NonFlare)?;
            losskit::global_regional_loss(
                &pred,
                &clean,
                &light,
                &non_flare,
                losskit::l1,
                a.global_weight,
                a.regional_weight,
            )?
        }
        LossKernel::Usask => {
            arity(k, n, 0)?;
            terms(k, &a.terms, 4)?;
            let t = &a.terms;
            losskit::usask_hybrid_loss(t[0], t[1], t[2], t[3], &w.usask)
        }
        LossKernel::Cevi => {
            arity(k, n, 0)?;
            terms(k, &a.terms, 3)?;
            let t = &a.terms;
            losskit::cevi_deflare_loss(t[0], t[1], t[2], &w.cevi)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(args: &[&str]) -> i32 {
        cli_dispatch(std::iter::once("flarebench").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(code(&["frobnicate"]), 1);
        assert_eq!(code(&["mask", "--bogus"]), 1);
        assert_eq!(code(&[]), 1);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(code(&["--help"]), 0);
        assert_eq!(code(&["synth", "--help"]), 0);
    }

    #[test]
    fn missing_input_exits_two() {
        assert_eq!(code(&["mask", "--input", "/nonexistent.png", "--out", "/tmp/x.png"]), 2);
    }

    #[test]
    fn scalar_kernels() {
        let a = LossArgs {
            kernel: LossKernel::Usask,
            operands: vec![],
            overrides: vec!["usask.alpha=1".into()],
            terms: vec![1.0, 2.0, 100.0, 1000.0],
            global_weight: 1.0,
            regional_weight: 1.0,
        };
        assert_eq!(loss(&a).unwrap(), 1.0 + 2.0 + 1.0 + 5.0);
        let bad = LossArgs { terms: vec![1.0], ..a };
        assert_eq!(loss(&bad).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn run_name_parsing() {
        assert_eq!(split_run("a=/x/y"), ("a".into(), PathBuf::from("/x/y")));
        assert_eq!(split_run("/x/run7"), ("run7".into(), PathBuf::from("/x/run7")));
    }
}
