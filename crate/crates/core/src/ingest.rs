//! On-disk dataset layout.
//!
//! A dataset is one JSON manifest plus one headerless raster file per
//! timestep. A raster is exactly `width * height` bytes, row 0 first,
//! left to right; dimensions live in the manifest:
//!
//! ```json
//! {"dataset_name": "demo",
//!  "regions": [{"region_id": "r1", "group": "Europe", "width": 2, "height": 2,
//!               "steps": [{"timestamp": "2018-01-01", "path": "rasters/r1/000.scl"}]}]}
//! ```
//!
//! Raster paths are relative to the directory holding the manifest.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scl::{SceneMask, SceneSeries, ValidationMode};

pub const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEntry {
    pub timestamp: String,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionEntry {
    pub region_id: String,
    pub group: Option<String>,
    pub width: usize,
    pub height: usize,
    pub steps: Vec<StepEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub dataset_name: String,
    pub regions: Vec<RegionEntry>,
    /// Directory raster paths are resolved against.
    #[serde(skip)]
    pub root: PathBuf,
}

impl DatasetManifest {
    pub fn region(&self, region_id: &str) -> Option<&RegionEntry> {
        self.regions.iter().find(|r| r.region_id == region_id)
    }

    /// Region id to group, for every region.
    pub fn groups(&self) -> BTreeMap<String, Option<String>> {
        self.regions
            .iter()
            .map(|r| (r.region_id.clone(), r.group.clone()))
            .collect()
    }

    pub fn resolve(&self, step: &StepEntry) -> PathBuf {
        self.root.join(&step.path)
    }
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    // chrono accepts some non-padded forms; require the canonical rendering
    NaiveDate::parse_from_str(s, DATE_FORMAT)
        .ok()
        .filter(|d| d.format(DATE_FORMAT).to_string() == s)
}

/// Reads and validates a manifest. Steps are stably sorted by timestamp and
/// every referenced raster must exist.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_manifest(&text, path, root)
}

/// Parses manifest text; `origin` only labels error messages.
pub fn parse_manifest(text: &str, origin: &Path, root: PathBuf) -> Result<DatasetManifest> {
    let parse_err = |reason: String| Error::ManifestParse {
        path: origin.to_path_buf(),
        reason,
    };
    let mut manifest: DatasetManifest =
        serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    manifest.root = root;

    let mut seen = HashSet::new();
    for region in &mut manifest.regions {
        let rid = region.region_id.clone();
        if !seen.insert(rid.clone()) {
            return Err(Error::DuplicateRegion(rid));
        }
        if region.width == 0 || region.height == 0 {
            return Err(parse_err(format!(
                "region {rid:?} has dimensions {}x{}",
                region.width, region.height
            )));
        }
        if region.steps.is_empty() {
            return Err(parse_err(format!("region {rid:?} has no steps")));
        }
        let mut dated = Vec::with_capacity(region.steps.len());
        for step in region.steps.drain(..) {
            let date = parse_date(&step.timestamp).ok_or_else(|| {
                parse_err(format!(
                    "region {rid:?}: timestamp {:?} is not YYYY-MM-DD",
                    step.timestamp
                ))
            })?;
            dated.push((date, step));
        }
        // stable: equal dates keep manifest order
        dated.sort_by_key(|(date, _)| *date);
        region.steps = dated.into_iter().map(|(_, s)| s).collect();

        let mut paths = HashSet::new();
        for step in &region.steps {
            if !paths.insert(step.path.as_str()) {
                return Err(parse_err(format!(
                    "region {rid:?} lists path {:?} twice",
                    step.path
                )));
            }
        }
    }
    for region in &manifest.regions {
        for step in &region.steps {
            let raster = manifest.resolve(step);
            if !raster.is_file() {
                return Err(Error::MissingRaster {
                    region_id: region.region_id.clone(),
                    path: raster,
                });
            }
        }
    }
    Ok(manifest)
}

/// Reads one raster as a `width * height` mask.
pub fn load_mask(
    path: impl AsRef<Path>,
    width: usize,
    height: usize,
    mode: ValidationMode,
) -> Result<SceneMask> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let expected = width * height;
    if bytes.len() != expected {
        return Err(Error::SizeMismatch {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len(),
        });
    }
    let mask = SceneMask::new(width, height, bytes)?;
    mask.validate(mode)?;
    Ok(mask)
}

pub fn load_series(
    manifest: &DatasetManifest,
    region_id: &str,
    mode: ValidationMode,
) -> Result<SceneSeries> {
    let entry = manifest
        .region(region_id)
        .ok_or_else(|| Error::UnknownRegion(region_id.to_owned()))?;
    load_entry(manifest, entry, mode).map_err(|e| e.in_region(region_id))
}

fn load_entry(
    manifest: &DatasetManifest,
    entry: &RegionEntry,
    mode: ValidationMode,
) -> Result<SceneSeries> {
    let mut timestamps = Vec::with_capacity(entry.steps.len());
    let mut masks = Vec::with_capacity(entry.steps.len());
    for step in &entry.steps {
        let date = parse_date(&step.timestamp).ok_or_else(|| Error::ManifestParse {
            path: manifest.root.clone(),
            reason: format!("bad timestamp {:?}", step.timestamp),
        })?;
        timestamps.push(date);
        masks.push(load_mask(
            manifest.resolve(step),
            entry.width,
            entry.height,
            mode,
        )?);
    }
    SceneSeries::new(entry.region_id.clone(), timestamps, masks)
}

fn path_component(region_id: &str) -> String {
    region_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes a series' rasters under `root/rasters/<region_id>/` and returns the
/// manifest entry describing them.
pub fn write_series(
    series: &SceneSeries,
    root: impl AsRef<Path>,
    group: Option<&str>,
) -> Result<RegionEntry> {
    let root = root.as_ref();
    let rel_dir = format!("rasters/{}", path_component(series.region_id()));
    let dir = root.join(&rel_dir);
    fs::create_dir_all(&dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let mut steps = Vec::with_capacity(series.len());
    for (i, (date, mask)) in series.iter().enumerate() {
        let rel = format!("{rel_dir}/{i:03}.scl");
        let full = root.join(&rel);
        fs::write(&full, mask.labels())
            .map_err(|e| Error::io(format!("writing {}", full.display()), e))?;
        steps.push(StepEntry {
            timestamp: date.format(DATE_FORMAT).to_string(),
            path: rel,
        });
    }
    Ok(RegionEntry {
        region_id: series.region_id().to_owned(),
        group: group.map(str::to_owned),
        width: series.width(),
        height: series.height(),
        steps,
    })
}

/// Pretty-printed manifest JSON with a trailing newline.
pub fn render_manifest(manifest: &DatasetManifest) -> String {
    let mut out = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    out.push('\n');
    out
}

pub fn write_manifest(manifest: &DatasetManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_manifest(manifest))
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}
