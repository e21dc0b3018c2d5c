//! Scene classification labels, masks, time series and label filters.
//!
//! A Sentinel-2 scene classification layer assigns one of twelve class tags
//! (0..=11) to every pixel. Masks are stored as raw `u8` so that out-of-range
//! bytes from damaged products can be carried around and handled according to
//! a [`ValidationMode`].

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of defined label codes.
pub const LABEL_COUNT: u8 = 12;

const LABEL_NAMES: [&str; LABEL_COUNT as usize] = [
    "No Data",
    "Saturated or Defective",
    "Dark Area Pixels",
    "Cloud Shadows",
    "Vegetation",
    "Not Vegetated",
    "Water",
    "Unclassified",
    "Cloud Medium",
    "Cloud High",
    "Thin Cirrus",
    "Snow",
];

/// A validated scene classification label code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SclLabel(u8);

impl SclLabel {
    pub const NO_DATA: SclLabel = SclLabel(0);
    pub const SATURATED_OR_DEFECTIVE: SclLabel = SclLabel(1);
    pub const DARK_AREA: SclLabel = SclLabel(2);
    pub const CLOUD_SHADOWS: SclLabel = SclLabel(3);
    pub const VEGETATION: SclLabel = SclLabel(4);
    pub const NOT_VEGETATED: SclLabel = SclLabel(5);
    pub const WATER: SclLabel = SclLabel(6);
    pub const UNCLASSIFIED: SclLabel = SclLabel(7);
    pub const CLOUD_MEDIUM: SclLabel = SclLabel(8);
    pub const CLOUD_HIGH: SclLabel = SclLabel(9);
    pub const THIN_CIRRUS: SclLabel = SclLabel(10);
    pub const SNOW: SclLabel = SclLabel(11);

    pub fn new(code: i64) -> Result<Self> {
        if (0..LABEL_COUNT as i64).contains(&code) {
            Ok(SclLabel(code as u8))
        } else {
            Err(Error::UnknownLabel(code))
        }
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn name(self) -> &'static str {
        LABEL_NAMES[self.0 as usize]
    }

    pub fn all() -> impl Iterator<Item = SclLabel> {
        (0..LABEL_COUNT).map(SclLabel)
    }
}

impl fmt::Display for SclLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.0, self.name())
    }
}

/// Canonical class name for a label code.
pub fn label_name(code: i64) -> Result<&'static str> {
    SclLabel::new(code).map(SclLabel::name)
}

/// A set of label codes, stored as a 12-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LabelSet(u16);

impl LabelSet {
    const FULL_BITS: u16 = (1 << LABEL_COUNT) - 1;

    pub const fn empty() -> Self {
        LabelSet(0)
    }

    pub const fn full() -> Self {
        LabelSet(Self::FULL_BITS)
    }

    pub fn from_bits(bits: u16) -> Self {
        LabelSet(bits & Self::FULL_BITS)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn insert(&mut self, label: SclLabel) {
        self.0 |= 1 << label.0;
    }

    /// Membership test on a raw byte; codes above 11 are never members.
    #[inline]
    pub fn contains_code(self, code: u8) -> bool {
        code < LABEL_COUNT && self.0 & (1 << code) != 0
    }

    pub fn contains(self, label: SclLabel) -> bool {
        self.contains_code(label.0)
    }

    pub fn complement(self) -> Self {
        LabelSet(!self.0 & Self::FULL_BITS)
    }

    pub fn is_subset(self, other: LabelSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Members in ascending code order.
    pub fn iter(self) -> impl Iterator<Item = SclLabel> {
        SclLabel::all().filter(move |l| self.contains(*l))
    }

    /// 256-entry membership table indexed by raw byte.
    pub fn lookup_table(self) -> [bool; 256] {
        let mut table = [false; 256];
        for label in self.iter() {
            table[label.0 as usize] = true;
        }
        table
    }
}

impl FromIterator<SclLabel> for LabelSet {
    fn from_iter<I: IntoIterator<Item = SclLabel>>(iter: I) -> Self {
        let mut set = LabelSet::empty();
        for label in iter {
            set.insert(label);
        }
        set
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    /// Everything except cloud shadows, medium and high cloud (3, 8, 9).
    AllButCloud,
    /// Vegetation and not-vegetated only (4, 5).
    VegNonVeg,
    Custom,
}

/// The set of labels counted as clean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabelFilter {
    kind: FilterKind,
    members: LabelSet,
}

impl LabelFilter {
    pub const ALL_BUT_CLOUD: &'static str = "all-but-cloud";
    pub const VEG_NON_VEG: &'static str = "veg-non-veg";
    pub const CUSTOM: &'static str = "custom";

    pub fn all_but_cloud() -> Self {
        let cloud: LabelSet = [
            SclLabel::CLOUD_SHADOWS,
            SclLabel::CLOUD_MEDIUM,
            SclLabel::CLOUD_HIGH,
        ]
        .into_iter()
        .collect();
        LabelFilter {
            kind: FilterKind::AllButCloud,
            members: cloud.complement(),
        }
    }

    pub fn veg_non_veg() -> Self {
        LabelFilter {
            kind: FilterKind::VegNonVeg,
            members: [SclLabel::VEGETATION, SclLabel::NOT_VEGETATED]
                .into_iter()
                .collect(),
        }
    }

    /// An ad-hoc filter. Fails on an empty set.
    pub fn custom(members: LabelSet) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::BadFilterSpec {
                spec: String::new(),
                reason: "filter has no members".into(),
            });
        }
        Ok(LabelFilter {
            kind: FilterKind::Custom,
            members,
        })
    }

    pub fn builtins() -> [LabelFilter; 2] {
        [Self::all_but_cloud(), Self::veg_non_veg()]
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FilterKind::AllButCloud => Self::ALL_BUT_CLOUD,
            FilterKind::VegNonVeg => Self::VEG_NON_VEG,
            FilterKind::Custom => Self::CUSTOM,
        }
    }

    pub fn members(&self) -> LabelSet {
        self.members
    }

    /// Renders the filter in the `--filter` grammar: built-ins by name,
    /// custom filters as an ascending code list.
    pub fn render(&self) -> String {
        match self.kind {
            FilterKind::Custom => self
                .members
                .iter()
                .map(|l| l.code().to_string())
                .collect::<Vec<_>>()
                .join(","),
            _ => self.name().to_owned(),
        }
    }
}

impl fmt::Display for LabelFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Parses `all-but-cloud | veg-non-veg | <code>(,<code>)*`.
pub fn parse_filter(spec: &str) -> Result<LabelFilter> {
    let bad = |reason: String| Error::BadFilterSpec {
        spec: spec.to_owned(),
        reason,
    };
    let trimmed = spec.trim();
    match trimmed {
        "" => return Err(bad("empty filter spec".into())),
        LabelFilter::ALL_BUT_CLOUD => return Ok(LabelFilter::all_but_cloud()),
        LabelFilter::VEG_NON_VEG => return Ok(LabelFilter::veg_non_veg()),
        _ => {}
    }
    let mut members = LabelSet::empty();
    for token in trimmed.split(',') {
        let token = token.trim();
        let code: i64 = token
            .parse()
            .map_err(|_| bad(format!("{token:?} is not an integer label code")))?;
        let label = SclLabel::new(code).map_err(|e| bad(e.to_string()))?;
        members.insert(label);
    }
    LabelFilter::custom(members)
}

impl FromStr for LabelFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_filter(s)
    }
}

/// How label bytes outside 0..=11 are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationMode {
    /// Reject masks containing unknown codes.
    #[default]
    Strict,
    /// Accept them; they belong to no filter and count as unclean.
    Lax,
}

impl FromStr for ValidationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(ValidationMode::Strict),
            "lax" => Ok(ValidationMode::Lax),
            other => Err(Error::InvalidConfig(format!(
                "unknown validation mode {other:?} (expected strict or lax)"
            ))),
        }
    }
}

/// One W×H grid of label bytes, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneMask {
    width: usize,
    height: usize,
    labels: Vec<u8>,
}

impl SceneMask {
    pub fn new(width: usize, height: usize, labels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "width and height must be at least 1".into(),
            });
        }
        let area = width.checked_mul(height).ok_or_else(|| Error::InvalidDimensions {
            width,
            height,
            reason: "area overflows".into(),
        })?;
        if labels.len() != area {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: format!("expected {area} labels, got {}", labels.len()),
            });
        }
        Ok(SceneMask {
            width,
            height,
            labels,
        })
    }

    /// A mask with every pixel set to `code`.
    pub fn filled(width: usize, height: usize, code: u8) -> Result<Self> {
        Self::new(width, height, vec![code; width.saturating_mul(height)])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn area(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<u8> {
        self.labels
    }

    /// Label at column `x`, row `y`.
    pub fn get(&self, x: usize, y: usize) -> Option<u8> {
        (x < self.width && y < self.height).then(|| self.labels[y * self.width + x])
    }

    /// First out-of-range label, if any.
    pub fn first_invalid(&self) -> Option<(usize, u8)> {
        self.labels
            .iter()
            .position(|&b| b >= LABEL_COUNT)
            .map(|i| (i, self.labels[i]))
    }

    pub fn validate(&self, mode: ValidationMode) -> Result<()> {
        match (mode, self.first_invalid()) {
            (ValidationMode::Strict, Some((index, value))) => {
                Err(Error::InvalidMask { index, value })
            }
            _ => Ok(()),
        }
    }
}

/// Timestamped masks for one sample region, in non-decreasing date order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneSeries {
    region_id: String,
    timestamps: Vec<NaiveDate>,
    masks: Vec<SceneMask>,
}

impl SceneSeries {
    pub fn new(
        region_id: impl Into<String>,
        timestamps: Vec<NaiveDate>,
        masks: Vec<SceneMask>,
    ) -> Result<Self> {
        let region_id = region_id.into();
        let invalid = |reason: String| Error::InvalidSeries {
            region_id: region_id.clone(),
            reason,
        };
        if masks.is_empty() {
            return Err(Error::EmptySeries);
        }
        if timestamps.len() != masks.len() {
            return Err(invalid(format!(
                "{} timestamps for {} masks",
                timestamps.len(),
                masks.len()
            )));
        }
        if let Some(w) = timestamps.windows(2).find(|w| w[1] < w[0]) {
            return Err(invalid(format!("timestamp {} follows {}", w[1], w[0])));
        }
        let (width, height) = (masks[0].width(), masks[0].height());
        if let Some(m) = masks
            .iter()
            .find(|m| m.width() != width || m.height() != height)
        {
            return Err(invalid(format!(
                "mask of {}x{} in a {width}x{height} series",
                m.width(),
                m.height()
            )));
        }
        Ok(SceneSeries {
            region_id,
            timestamps,
            masks,
        })
    }

    pub fn region_id(&self) -> &str {
        &self.region_id
    }

    pub fn timestamps(&self) -> &[NaiveDate] {
        &self.timestamps
    }

    pub fn masks(&self) -> &[SceneMask] {
        &self.masks
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    /// Always false for a constructed series; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn width(&self) -> usize {
        self.masks[0].width()
    }

    pub fn height(&self) -> usize {
        self.masks[0].height()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, &SceneMask)> {
        self.timestamps.iter().copied().zip(self.masks.iter())
    }
}
