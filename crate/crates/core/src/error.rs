use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown SCL label code {0} (valid codes are 0..=11)")]
    UnknownLabel(i64),

    #[error("bad filter spec {spec:?}: {reason}")]
    BadFilterSpec { spec: String, reason: String },

    #[error("invalid mask: label {value} at pixel index {index} is outside 0..=11")]
    InvalidMask { index: usize, value: u8 },

    #[error("invalid dimensions {width}x{height}: {reason}")]
    InvalidDimensions {
        width: usize,
        height: usize,
        reason: String,
    },

    #[error("series is empty")]
    EmptySeries,

    #[error("invalid series {region_id:?}: {reason}")]
    InvalidSeries { region_id: String, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot parse manifest {path}: {reason}")]
    ManifestParse { path: PathBuf, reason: String },

    #[error("raster {path} referenced by region {region_id:?} does not exist")]
    MissingRaster { region_id: String, path: PathBuf },

    #[error("region id {0:?} appears more than once")]
    DuplicateRegion(String),

    #[error("raster {path} has {actual} bytes, expected {expected}")]
    SizeMismatch {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },

    #[error("unknown region {0:?}")]
    UnknownRegion(String),

    #[error("region {region_id:?}: {source}")]
    Region {
        region_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("no assessments to aggregate")]
    EmptyInput,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("metrics reference region {0:?} which has no assessment")]
    UnknownRegionInMetrics(String),

    #[error("cannot parse metrics: {0}")]
    MetricsParse(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn in_region(self, region_id: &str) -> Self {
        match self {
            e @ Error::Region { .. } => e,
            e => Error::Region {
                region_id: region_id.to_owned(),
                source: Box::new(e),
            },
        }
    }

    /// Strips any `Region` wrapping and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Region { source, .. } => source.root(),
            e => e,
        }
    }
}
