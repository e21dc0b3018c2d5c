//! Parallel assessment of whole datasets.
//!
//! Regions are the unit of work. Results are sorted by region id before they
//! are returned, so output never depends on the worker count.

use rayon::prelude::*;

use crate::coverage::{assess_region, AssessmentConfig, RegionAssessment};
use crate::error::{Error, Result};
use crate::ingest::{load_series, DatasetManifest};
use crate::synth::SynthDataset;

fn pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))
}

/// Sorts by region id; on failure reports the error of the smallest failing id.
fn settle(mut results: Vec<(String, Result<RegionAssessment>)>) -> Result<Vec<RegionAssessment>> {
    results.sort_by(|a, b| a.0.cmp(&b.0));
    results.into_iter().map(|(_, r)| r).collect()
}

/// Assesses every region of a manifest. `parallelism == 0` uses all cores.
pub fn assess_manifest(
    manifest: &DatasetManifest,
    config: &AssessmentConfig,
    parallelism: usize,
) -> Result<Vec<RegionAssessment>> {
    config.validate()?;
    let results = pool(parallelism)?.install(|| {
        manifest
            .regions
            .par_iter()
            .map(|entry| {
                let id = entry.region_id.clone();
                let r = load_series(manifest, &id, config.mode)
                    .and_then(|s| assess_region(&s, config))
                    .map_err(|e| e.in_region(&id));
                (id, r)
            })
            .collect()
    });
    settle(results)
}

/// Generates and assesses synthetic regions without touching disk.
pub fn assess_synthetic(
    dataset: &SynthDataset,
    config: &AssessmentConfig,
    parallelism: usize,
) -> Result<Vec<RegionAssessment>> {
    config.validate()?;
    dataset.validate()?;
    let results = pool(parallelism)?.install(|| {
        (0..dataset.n_regions)
            .into_par_iter()
            .map(|k| {
                let id = dataset.region_id(k);
                let r = dataset
                    .region(k)
                    .and_then(|s| assess_region(&s, config))
                    .map_err(|e| e.in_region(&id));
                (id, r)
            })
            .collect()
    });
    settle(results)
}
