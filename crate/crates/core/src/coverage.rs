//! Spatial and temporal clean coverage of a scene series.
//!
//! For a clean label set K:
//!
//! * `SC_t` is the fraction of pixels of mask `t` whose label is in K,
//! * `SC` is the mean of `SC_t` over the series,
//! * `TC` is the fraction of timesteps with `SC_t >= step_thresh`,
//! * SCA / TCA are `high` when `SC >= sc_thresh` / `TC >= tc_thresh`.
//!
//! All comparisons are inclusive. Per-step and region fractions are formed
//! from integer pixel counts with a single division, so every value is the
//! correctly rounded `f64` of an exact rational. Because every step of a
//! series has the same area, `SC` is computed as
//! `total_clean / (T * W * H)`, which equals the mean of the per-step
//! fractions exactly in rational arithmetic and makes `SC` independent of
//! timestep order bit-for-bit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scl::{LabelFilter, SceneMask, SceneSeries, ValidationMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Assessment {
    High,
    Low,
}

impl Assessment {
    pub fn as_str(self) -> &'static str {
        match self {
            Assessment::High => "high",
            Assessment::Low => "low",
        }
    }

    fn from_threshold(value: f64, thresh: f64) -> Self {
        if value >= thresh {
            Assessment::High
        } else {
            Assessment::Low
        }
    }
}

impl fmt::Display for Assessment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Filter, thresholds and validation mode for an assessment run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssessmentConfig {
    pub filter: LabelFilter,
    /// Threshold on `SC` for the SCA label.
    pub sc_thresh: f64,
    /// Threshold on each `SC_t` inside the temporal coverage count.
    pub step_thresh: f64,
    /// Threshold on `TC` for the TCA label.
    pub tc_thresh: f64,
    pub mode: ValidationMode,
}

impl AssessmentConfig {
    /// Default thresholds for the agricultural (AI4EO) regime.
    pub const DEFAULT_THRESH: f64 = 0.7;
    /// Thresholds used for the global LandCoverNet analysis.
    pub const LANDCOVERNET_THRESH: f64 = 0.5;

    /// One threshold used for all three roles.
    pub fn new(filter: LabelFilter, thresh: f64) -> Self {
        AssessmentConfig {
            filter,
            sc_thresh: thresh,
            step_thresh: thresh,
            tc_thresh: thresh,
            mode: ValidationMode::Strict,
        }
    }

    pub fn with_mode(mut self, mode: ValidationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [
            ("sc_thresh", self.sc_thresh),
            ("step_thresh", self.step_thresh),
            ("tc_thresh", self.tc_thresh),
        ] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {t} is outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

impl Default for AssessmentConfig {
    fn default() -> Self {
        Self::new(LabelFilter::all_but_cloud(), Self::DEFAULT_THRESH)
    }
}

/// Coverage figures for one region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionAssessment {
    pub region_id: String,
    pub sc_per_step: Vec<f64>,
    pub sc: f64,
    pub tc: f64,
    pub sca: Assessment,
    pub tca: Assessment,
    pub n_steps: usize,
}

/// Number of pixels whose label is in the filter.
pub fn count_clean(mask: &SceneMask, filter: &LabelFilter, mode: ValidationMode) -> Result<u64> {
    mask.validate(mode)?;
    let table = filter.members().lookup_table();
    Ok(mask
        .labels()
        .iter()
        .filter(|&&b| table[b as usize])
        .count() as u64)
}

/// `SC_t`: clean pixel fraction of one mask.
pub fn spatial_coverage_step(
    mask: &SceneMask,
    filter: &LabelFilter,
    mode: ValidationMode,
) -> Result<f64> {
    let clean = count_clean(mask, filter, mode)?;
    Ok(ratio(clean, mask.area() as u64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionCoverage {
    pub sc: f64,
    pub sc_per_step: Vec<f64>,
}

/// `SC` and the `SC_t` trace of a series, in timestamp order.
pub fn spatial_coverage_region(
    series: &SceneSeries,
    filter: &LabelFilter,
    mode: ValidationMode,
) -> Result<RegionCoverage> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let area = (series.width() * series.height()) as u64;
    let mut total = 0u64;
    let mut sc_per_step = Vec::with_capacity(series.len());
    for mask in series.masks() {
        let clean = count_clean(mask, filter, mode)?;
        total += clean;
        sc_per_step.push(ratio(clean, area));
    }
    Ok(RegionCoverage {
        sc: ratio(total, area * series.len() as u64),
        sc_per_step,
    })
}

/// `TC`: fraction of steps whose coverage reaches `step_thresh`.
pub fn temporal_coverage(sc_per_step: &[f64], step_thresh: f64) -> Result<f64> {
    if sc_per_step.is_empty() {
        return Err(Error::EmptySeries);
    }
    let passing = sc_per_step.iter().filter(|&&sc| sc >= step_thresh).count();
    Ok(ratio(passing as u64, sc_per_step.len() as u64))
}

pub fn sca_label(sc: f64, sc_thresh: f64) -> Assessment {
    Assessment::from_threshold(sc, sc_thresh)
}

pub fn tca_label(tc: f64, tc_thresh: f64) -> Assessment {
    Assessment::from_threshold(tc, tc_thresh)
}

pub fn assess_region(series: &SceneSeries, config: &AssessmentConfig) -> Result<RegionAssessment> {
    config.validate()?;
    let RegionCoverage { sc, sc_per_step } =
        spatial_coverage_region(series, &config.filter, config.mode)?;
    let tc = temporal_coverage(&sc_per_step, config.step_thresh)?;
    Ok(RegionAssessment {
        region_id: series.region_id().to_owned(),
        n_steps: sc_per_step.len(),
        sca: sca_label(sc, config.sc_thresh),
        tca: tca_label(tc, config.tc_thresh),
        sc_per_step,
        sc,
        tc,
    })
}

#[inline]
fn ratio(num: u64, den: u64) -> f64 {
    num as f64 / den as f64
}
