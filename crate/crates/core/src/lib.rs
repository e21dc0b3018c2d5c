//! Clean spatio-temporal coverage of satellite image time series.
//!
//! Given per-pixel scene classification masks for a sample region and a set of
//! labels regarded as clean, this crate computes the per-timestep spatial
//! coverage, the region's spatial and temporal coverage and their high/low
//! assessments, then aggregates regions by group and relates coverage to
//! externally computed model metrics.
//!
//! ```
//! use sitscov_core::{assess_region, AssessmentConfig, LabelFilter, SceneMask, SceneSeries};
//! use chrono::NaiveDate;
//!
//! let day = NaiveDate::from_ymd_opt(2019, 3, 1).unwrap();
//! let mask = SceneMask::new(2, 2, vec![4, 5, 8, 4]).unwrap();
//! let series = SceneSeries::new("field-1", vec![day], vec![mask]).unwrap();
//! let a = assess_region(&series, &AssessmentConfig::new(LabelFilter::veg_non_veg(), 0.7)).unwrap();
//! assert_eq!(a.sc, 0.75);
//! ```

pub mod coverage;
pub mod error;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod scl;
pub mod stats;
pub mod synth;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

pub use coverage::{
    assess_region, sca_label, spatial_coverage_region, spatial_coverage_step, tca_label,
    temporal_coverage, Assessment, AssessmentConfig, RegionAssessment, RegionCoverage,
};
pub use error::{Error, Result};
pub use ingest::{load_manifest, load_mask, load_series, DatasetManifest, RegionEntry, StepEntry};
pub use report::{aggregate, DistStats, GroupMap, GroupSummary};
pub use scl::{label_name, parse_filter, LabelFilter, LabelSet, SceneMask, SceneSeries, SclLabel, ValidationMode};
pub use stats::{pearson, split_by_label, MetricTable};
pub use synth::{SynthDataset, SynthSpec};
