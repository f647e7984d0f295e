#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use flarebench::datacli::{save_image, BitDepth};
use flarebench::imgcore::Image;
use flarebench::synth::FlareAsset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn noise(h: usize, w: usize, c: usize, seed: u64) -> Image {
    let mut r = rng(seed);
    let data = (0..h * w * c).map(|_| r.random::<f32>()).collect();
    Image::new(h, w, c, data).unwrap()
}

/// Smooth colored gradient with mild noise, kept below saturation.
pub fn background(h: usize, w: usize, seed: u64) -> Image {
    let mut r = rng(seed);
    let tilt: [f32; 3] = [r.random_range(0.1..0.4), r.random_range(0.1..0.4), r.random_range(0.1..0.4)];
    Image::from_fn(h, w, 3, |y, x, c| {
        let t = (y as f32 / h as f32 + x as f32 / w as f32) * 0.5;
        (0.05 + tilt[c] * t + 0.02 * r.random::<f32>()).min(0.7)
    })
}

/// A radial flare with a saturated core, a glow and a horizontal streak,
/// plus matching light/glare/streak annotation layers.
pub fn flare_asset(h: usize, w: usize, seed: u64) -> FlareAsset {
    let mut r = rng(seed);
    let cy = r.random_range(h as f32 * 0.35..h as f32 * 0.65);
    let cx = r.random_range(w as f32 * 0.35..w as f32 * 0.65);
    let scale = h.min(w) as f32;
    let core = 0.06 * scale;
    let glow = 0.25 * scale;
    let streak_half = (0.02 * scale).max(1.5);
    let dist = |y: usize, x: usize| ((y as f32 - cy).powi(2) + (x as f32 - cx).powi(2)).sqrt();
    let flare = Image::from_fn(h, w, 3, |y, x, _| {
        let d = dist(y, x);
        let halo = (-(d / glow).powi(2)).exp() * 0.6;
        let streak = if (y as f32 - cy).abs() <= streak_half { 0.5 * (-(d / (2.0 * glow))).exp() } else { 0.0 };
        if d <= core { 1.0 } else { (halo + streak).min(1.0) }
    });
    let light = Image::from_fn(h, w, 1, |y, x, _| if dist(y, x) <= core { 1.0 } else { 0.0 });
    let glare = Image::from_fn(h, w, 1, |y, x, _| if dist(y, x) <= glow { 1.0 } else { 0.0 });
    let streak = Image::from_fn(h, w, 1, |y, x, _| {
        if (y as f32 - cy).abs() <= streak_half && dist(y, x) <= 2.0 * glow { 1.0 } else { 0.0 }
    });
    FlareAsset {
        flare,
        light: Some(light),
        glare: Some(glare),
        streak: Some(streak),
    }
}

pub struct FixtureSet {
    pub backgrounds: PathBuf,
    pub flares: PathBuf,
}

/// Writes backgrounds and annotated flares as 16-bit PNGs with their list
/// files under `dir`.
pub fn write_fixtures(dir: &Path, n_bg: usize, n_flare: usize, h: usize, w: usize) -> FixtureSet {
    let assets = dir.join("assets");
    fs::create_dir_all(&assets).unwrap();
    let mut bg_list = String::new();
    for i in 0..n_bg {
        let name = format!("bg{i}.png");
        save_image(&background(h, w, 100 + i as u64), &assets.join(&name), BitDepth::Sixteen).unwrap();
        bg_list.push_str(&format!("assets/{name}\n"));
    }
    let mut flare_list = String::from("# flare\tlight\tglare\tstreak\n");
    for i in 0..n_flare {
        let a = flare_asset(h, w, 200 + i as u64);
        let mut fields = Vec::new();
        for (tag, img) in [
            ("f", Some(&a.flare)),
            ("l", a.light.as_ref()),
            ("g", a.glare.as_ref()),
            ("s", a.streak.as_ref()),
        ] {
            let name = format!("{tag}{i}.png");
            save_image(img.unwrap(), &assets.join(&name), BitDepth::Sixteen).unwrap();
            fields.push(format!("assets/{name}"));
        }
        flare_list.push_str(&fields.join("\t"));
        flare_list.push('\n');
    }
    let backgrounds = dir.join("backgrounds.txt");
    let flares = dir.join("flares.txt");
    fs::write(&backgrounds, bg_list).unwrap();
    fs::write(&flares, flare_list).unwrap();
    FixtureSet { backgrounds, flares }
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flarebench"))
        .args(args)
        .env_remove("FLAREBENCH_THREADS")
        .output()
        .expect("binary runs")
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// File name to contents for every file directly inside `dir`.
pub fn dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().unwrap().is_file())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect()
}

/// Copies `<id>_<role>.png` of every manifest record to `<dst>/<id>.png`.
pub fn copy_role_as_predictions(manifest: &Path, role: &str, dst: &Path) {
    let m = flarebench::datacli::load_manifest(manifest).unwrap();
    fs::create_dir_all(dst).unwrap();
    for rec in &m.records {
        let src = m.resolve(rec, role).unwrap();
        fs::copy(src, dst.join(format!("{}.png", rec.id))).unwrap();
    }
}
