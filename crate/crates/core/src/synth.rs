//! Seeded synthetic scene series.
//!
//! # Generator
//!
//! All randomness comes from SplitMix64 (Steele, Lea & Flood 2014):
//!
//! ```text
//! state = state + 0x9E3779B97F4A7C15            (wrapping)
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9      (wrapping)
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB      (wrapping)
//! output z ^ (z >> 31)
//! ```
//!
//! A series is drawn from a generator seeded with `SynthSpec::seed`. Pixels are
//! generated mask by mask in row-major order, one 64-bit output `u` each:
//!
//! * the pixel is clean iff `(u >> 32) < round(clean_prob * 2^32)`, rounding
//!   half away from zero;
//! * the label is `pool[((u & 0xFFFF_FFFF) * pool.len()) >> 32]`, where `pool`
//!   is the ascending list of filter members (clean) or of the complement
//!   (unclean).
//!
//! # Datasets
//!
//! Region `k` of a [`SynthDataset`] uses the sub-seed
//! `mix(seed ^ mix(k))`, where `mix(x)` is the SplitMix64 output for
//! `state = x` (one step of the generator above). From that region's stream,
//! the first output picks the step count
//! `min_steps + (((u >> 32) * (max_steps - min_steps + 1)) >> 32)`, the second
//! picks `clean_prob = lo + (hi - lo) * ((u >> 11) * 2^-53)`, then pixels
//! follow as for a single series. Timestamps start at 2018-01-01 and advance
//! five days per step; region `k` is named `region-{k:05}` and assigned
//! `groups[k % groups.len()]` when groups are given.

use std::path::Path;

use chrono::{Days, NaiveDate};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::{self, DatasetManifest, RegionEntry};
use crate::scl::{LabelFilter, SceneMask, SceneSeries};

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `0..n` via multiply-shift on the high 32 bits.
    pub fn below(&mut self, n: u32) -> u32 {
        (((self.next_u64() >> 32) * n as u64) >> 32) as u32
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// One output of a generator seeded at `x`.
pub fn mix(x: u64) -> u64 {
    SplitMix64::new(x).next_u64()
}

pub fn region_seed(seed: u64, region_index: u64) -> u64 {
    mix(seed ^ mix(region_index))
}

pub fn start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2018, 1, 1).expect("valid date")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub clean_prob: f64,
    pub filter: LabelFilter,
}

fn clean_threshold(p: f64) -> u64 {
    (p * 4_294_967_296.0).round() as u64
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.n_steps == 0 {
            return Err(Error::InvalidConfig(format!(
                "synthetic dimensions {}x{}x{} must all be at least 1",
                self.width, self.height, self.n_steps
            )));
        }
        check_prob(self.clean_prob, &self.filter)
    }
}

fn check_prob(p: f64, filter: &LabelFilter) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!("clean_prob {p} is outside [0, 1]")));
    }
    if clean_threshold(p) < 1 << 32 && filter.members().complement().is_empty() {
        return Err(Error::InvalidConfig(format!(
            "filter {filter} covers every label, so clean_prob must be 1 (got {p})"
        )));
    }
    Ok(())
}

struct PixelSampler {
    threshold: u64,
    // clean codes followed by unclean codes
    pools: [u8; 12],
    n_clean: u64,
    n_unclean: u64,
}

impl PixelSampler {
    fn new(filter: &LabelFilter, clean_prob: f64) -> Self {
        let mut pools = [0u8; 12];
        let members = filter.members();
        let ordered = members.iter().chain(members.complement().iter());
        for (slot, label) in pools.iter_mut().zip(ordered) {
            *slot = label.code();
        }
        PixelSampler {
            threshold: clean_threshold(clean_prob),
            pools,
            n_clean: members.len() as u64,
            n_unclean: members.complement().len() as u64,
        }
    }

    #[inline]
    fn sample(&self, rng: &mut SplitMix64) -> u8 {
        let u = rng.next_u64();
        let clean = (u >> 32) < self.threshold;
        let (offset, len) = if clean {
            (0, self.n_clean)
        } else {
            (self.n_clean, self.n_unclean)
        };
        self.pools[(offset + (((u & 0xFFFF_FFFF) * len) >> 32)) as usize]
    }

    fn fill(&self, rng: &mut SplitMix64, out: &mut [u8]) {
        for px in out {
            *px = self.sample(rng);
        }
    }
}

fn series_from_stream(
    region_id: String,
    rng: &mut SplitMix64,
    width: usize,
    height: usize,
    n_steps: usize,
    sampler: &PixelSampler,
) -> SceneSeries {
    let mut timestamps = Vec::with_capacity(n_steps);
    let mut masks = Vec::with_capacity(n_steps);
    for t in 0..n_steps {
        let mut labels = vec![0u8; width * height];
        sampler.fill(rng, &mut labels);
        timestamps.push(start_date() + Days::new(5 * t as u64));
        masks.push(SceneMask::new(width, height, labels).expect("dimensions validated"));
    }
    SceneSeries::new(region_id, timestamps, masks).expect("synthetic series is well formed")
}

pub fn generate(spec: &SynthSpec) -> Result<SceneSeries> {
    generate_named(spec, "synth")
}

pub fn generate_named(spec: &SynthSpec, region_id: &str) -> Result<SceneSeries> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let sampler = PixelSampler::new(&spec.filter, spec.clean_prob);
    Ok(series_from_stream(
        region_id.to_owned(),
        &mut rng,
        spec.width,
        spec.height,
        spec.n_steps,
        &sampler,
    ))
}

/// A whole synthetic dataset of independently seeded regions.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub name: String,
    pub n_regions: usize,
    pub width: usize,
    pub height: usize,
    pub min_steps: usize,
    pub max_steps: usize,
    pub seed: u64,
    pub clean_prob_min: f64,
    pub clean_prob_max: f64,
    pub filter: LabelFilter,
    pub groups: Vec<String>,
}

impl SynthDataset {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.min_steps == 0 {
            return Err(Error::InvalidConfig(
                "synthetic width, height and steps must be at least 1".into(),
            ));
        }
        if self.max_steps < self.min_steps || self.max_steps - self.min_steps >= u32::MAX as usize {
            return Err(Error::InvalidConfig(format!(
                "bad step range {}..={}",
                self.min_steps, self.max_steps
            )));
        }
        if self.clean_prob_max < self.clean_prob_min {
            return Err(Error::InvalidConfig(format!(
                "bad clean_prob range {}..={}",
                self.clean_prob_min, self.clean_prob_max
            )));
        }
        check_prob(self.clean_prob_min, &self.filter)?;
        check_prob(self.clean_prob_max, &self.filter)
    }

    pub fn region_id(&self, k: usize) -> String {
        format!("region-{k:05}")
    }

    pub fn group(&self, k: usize) -> Option<&str> {
        (!self.groups.is_empty()).then(|| self.groups[k % self.groups.len()].as_str())
    }

    /// Region `k`, independent of every other region.
    pub fn region(&self, k: usize) -> Result<SceneSeries> {
        self.validate()?;
        let mut rng = SplitMix64::new(region_seed(self.seed, k as u64));
        let span = (self.max_steps - self.min_steps + 1) as u32;
        let n_steps = self.min_steps + rng.below(span) as usize;
        let p = self.clean_prob_min + (self.clean_prob_max - self.clean_prob_min) * rng.unit_f64();
        let sampler = PixelSampler::new(&self.filter, p.min(self.clean_prob_max));
        Ok(series_from_stream(
            self.region_id(k),
            &mut rng,
            self.width,
            self.height,
            n_steps,
            &sampler,
        ))
    }

    /// Writes rasters and `manifest.json` under `dir`; returns the manifest.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<DatasetManifest> {
        let dir = dir.as_ref();
        self.validate()?;
        let regions = (0..self.n_regions)
            .into_par_iter()
            .map(|k| -> Result<RegionEntry> {
                let series = self.region(k)?;
                ingest::write_series(&series, dir, self.group(k))
            })
            .collect::<Result<Vec<_>>>()?;
        let manifest = DatasetManifest {
            dataset_name: self.name.clone(),
            regions,
            root: dir.to_path_buf(),
        };
        ingest::write_manifest(&manifest, dir.join("manifest.json"))?;
        Ok(manifest)
    }
}
