//! Line-JSON manifests: one record per line, paths relative to the
//! manifest's directory.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Path keys used by synthesized datasets.
pub mod roles {
    pub const CORRUPTED: &str = "corrupted";
    pub const CLEAN: &str = "clean";
    pub const FLARE: &str = "flare";
    pub const LIGHT_MASK: &str = "light_mask";
    pub const GLARE_MASK: &str = "glare_mask";
    pub const STREAK_MASK: &str = "streak_mask";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<serde_json::Value>,
    /// Role name to path.
    #[serde(flatten)]
    pub paths: BTreeMap<String, String>,
}

impl ManifestRecord {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            sample_seed: None,
            params: None,
            paths: BTreeMap::new(),
        }
    }

    pub fn with_path(mut self, role: &str, path: impl Into<String>) -> Self {
        self.paths.insert(role.to_string(), path.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
    /// Sorted by id.
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    /// Builds a manifest, sorting records and rejecting duplicate ids.
    pub fn new(base_dir: impl Into<PathBuf>, mut records: Vec<ManifestRecord>) -> Result<Self> {
        records.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = records.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Config(format!("duplicate record id `{}`", w[0].id)));
        }
        Ok(Self {
            base_dir: base_dir.into(),
            records,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ManifestRecord> {
        self.records
            .binary_search_by(|r| r.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.records[i])
    }

    pub fn resolve(&self, rec: &ManifestRecord, role: &str) -> Option<PathBuf> {
        rec.paths.get(role).map(|p| self.base_dir.join(p))
    }

    /// Checks that every referenced path exists.
    pub fn validate_paths(&self) -> Result<()> {
        for rec in &self.records {
            for role in rec.paths.keys() {
                let p = self.resolve(rec, role).expect("listed role");
                if !p.is_file() {
                    return Err(Error::io(
                        p,
                        std::io::Error::new(
                            std::io::ErrorKind::NotFound,
                            format!("`{role}` of record `{}` does not exist", rec.id),
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn base_of(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ManifestRecord = serde_json::from_str(line).map_err(|e| Error::Manifest {
            path: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        if let Some(first) = seen.insert(rec.id.clone(), line_no) {
            return Err(Error::Manifest {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("duplicate id `{}` (first seen on line {first})", rec.id),
            });
        }
        records.push(rec);
    }
    Manifest::new(base_of(path), records)
}

/// Serializes records in id order, one JSON object per line.
pub fn manifest_to_string(m: &Manifest) -> String {
    let mut out = String::new();
    for rec in &m.records {
        out.push_str(&serde_json::to_string(rec).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn write_manifest(m: &Manifest, path: &Path) -> Result<()> {
    fs::write(path, manifest_to_string(m)).map_err(|e| Error::io(path, e))
}

fn list_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r').to_string()))
        .collect())
}

/// Reads a list of image paths, one per line; `#` starts a comment line.
/// Relative entries resolve against the list's directory.
pub fn load_path_list(path: &Path) -> Result<Vec<PathBuf>> {
    let base = base_of(path);
    Ok(list_lines(path)?
        .into_iter()
        .map(|(_, l)| base.join(l.trim()))
        .collect())
}

/// A flare image with optional annotation layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlareEntry {
    pub flare: PathBuf,
    pub light: Option<PathBuf>,
    pub glare: Option<PathBuf>,
    pub streak: Option<PathBuf>,
}

/// Reads a flare list. Each line holds up to four tab-separated fields:
/// `flare [light [glare [streak]]]`; empty fields mean "no annotation".
pub fn load_flare_list(path: &Path) -> Result<Vec<FlareEntry>> {
    let base = base_of(path);
    list_lines(path)?
        .into_iter()
        .map(|(line, l)| {
            let fields: Vec<&str> = l.split('\t').map(str::trim).collect();
            if fields.len() > 4 || fields[0].is_empty() {
                return Err(Error::Manifest {
                    path: path.to_path_buf(),
                    line,
                    message: "expected `flare[\\tlight[\\tglare[\\tstreak]]]`".into(),
                });
            }
            let opt = |i: usize| {
                fields
                    .get(i)
                    .filter(|f| !f.is_empty())
                    .map(|f| base.join(f))
            };
            Ok(FlareEntry {
                flare: base.join(fields[0]),
                light: opt(1),
                glare: opt(2),
                streak: opt(3),
            })
        })
        .collect()
}
