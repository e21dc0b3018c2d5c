//! Coverage versus externally supplied per-region metrics.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::coverage::{Assessment, RegionAssessment};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub region_id: String,
    pub metric_name: String,
    pub value: f64,
}

/// Per-region metric values, unique on `(region_id, metric_name)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricTable {
    rows: Vec<MetricRow>,
}

impl MetricTable {
    pub fn new(rows: Vec<MetricRow>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &rows {
            if !r.value.is_finite() {
                return Err(Error::MetricsParse(format!(
                    "non-finite value for ({}, {})",
                    r.region_id, r.metric_name
                )));
            }
            if !seen.insert((r.region_id.as_str(), r.metric_name.as_str())) {
                return Err(Error::MetricsParse(format!(
                    "duplicate row for ({}, {})",
                    r.region_id, r.metric_name
                )));
            }
        }
        Ok(MetricTable { rows })
    }

    /// Reads `region_id,metric_name,value` CSV with a header row.
    pub fn from_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = reader
            .headers()
            .map_err(|e| Error::MetricsParse(e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["region_id", "metric_name", "value"] {
            return Err(Error::MetricsParse(format!(
                "expected header region_id,metric_name,value, got {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let rows = reader
            .deserialize()
            .collect::<std::result::Result<Vec<MetricRow>, _>>()
            .map_err(|e| Error::MetricsParse(e.to_string()))?;
        Self::new(rows)
    }

    pub fn rows(&self) -> &[MetricRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct metric names, sorted.
    pub fn metric_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.rows.iter().map(|r| r.metric_name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        names
    }
}

/// Sample Pearson correlation, centred two-pass form.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DegenerateInput(format!(
            "length mismatch {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "need at least 2 pairs, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateInput("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Sca,
    Tca,
}

impl LabelKind {
    fn of(self, a: &RegionAssessment) -> Assessment {
        match self {
            LabelKind::Sca => a.sca,
            LabelKind::Tca => a.tca,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassValues {
    pub region_ids: Vec<String>,
    pub values: Vec<f64>,
    /// Absent for an empty class.
    pub mean: Option<f64>,
}

impl ClassValues {
    fn from_pairs(mut pairs: Vec<(String, f64)>) -> Self {
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let (region_ids, values): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let mean = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
        ClassValues {
            region_ids,
            values,
            mean,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSplit {
    pub metric_name: String,
    pub by: LabelKind,
    pub high: ClassValues,
    pub low: ClassValues,
}

fn index(assessments: &[RegionAssessment]) -> HashMap<&str, &RegionAssessment> {
    assessments.iter().map(|a| (a.region_id.as_str(), a)).collect()
}

fn check_join(
    by_id: &HashMap<&str, &RegionAssessment>,
    metrics: &MetricTable,
) -> Result<()> {
    match metrics.rows().iter().find(|r| !by_id.contains_key(r.region_id.as_str())) {
        Some(r) => Err(Error::UnknownRegionInMetrics(r.region_id.clone())),
        None => Ok(()),
    }
}

type Members = Vec<(String, f64)>;

/// Partitions each metric's values by the high/low label of their region.
pub fn split_by_label(
    assessments: &[RegionAssessment],
    metrics: &MetricTable,
    which: LabelKind,
) -> Result<Vec<MetricSplit>> {
    let by_id = index(assessments);
    check_join(&by_id, metrics)?;
    // metric name -> (high, low) members
    let mut parts: BTreeMap<&str, (Members, Members)> = BTreeMap::new();
    for row in metrics.rows() {
        let entry = parts.entry(row.metric_name.as_str()).or_default();
        let pair = (row.region_id.clone(), row.value);
        match which.of(by_id[row.region_id.as_str()]) {
            Assessment::High => entry.0.push(pair),
            Assessment::Low => entry.1.push(pair),
        }
    }
    Ok(parts
        .into_iter()
        .map(|(name, (high, low))| MetricSplit {
            metric_name: name.to_owned(),
            by: which,
            high: ClassValues::from_pairs(high),
            low: ClassValues::from_pairs(low),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverageKind {
    Sc,
    Tc,
}

impl CoverageKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CoverageKind::Sc => "sc",
            CoverageKind::Tc => "tc",
        }
    }

    /// Label derived from this coverage.
    pub fn label(self) -> LabelKind {
        match self {
            CoverageKind::Sc => LabelKind::Sca,
            CoverageKind::Tc => LabelKind::Tca,
        }
    }

    fn of(self, a: &RegionAssessment) -> f64 {
        match self {
            CoverageKind::Sc => a.sc,
            CoverageKind::Tc => a.tc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correlation {
    pub metric_name: String,
    pub against: CoverageKind,
    pub n: usize,
    pub r: f64,
    pub r_x100: f64,
}

/// Pearson r of every metric against SC and TC, over the regions carrying
/// that metric (in region id order).
pub fn correlate(assessments: &[RegionAssessment], metrics: &MetricTable) -> Result<Vec<Correlation>> {
    let by_id = index(assessments);
    check_join(&by_id, metrics)?;
    let mut out = Vec::new();
    for name in metrics.metric_names() {
        let mut rows: Vec<&MetricRow> = metrics.rows().iter().filter(|r| r.metric_name == name).collect();
        rows.sort_by(|a, b| a.region_id.cmp(&b.region_id));
        let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
        for against in [CoverageKind::Sc, CoverageKind::Tc] {
            let cov: Vec<f64> = rows.iter().map(|r| against.of(by_id[r.region_id.as_str()])).collect();
            let r = pearson(&cov, &values).map_err(|e| {
                Error::DegenerateInput(format!("{name} vs {}: {e}", against.as_str()))
            })?;
            out.push(Correlation {
                metric_name: name.to_owned(),
                against,
                n: rows.len(),
                r,
                r_x100: 100.0 * r,
            });
        }
    }
    Ok(out)
}

/// Correlations plus the matching high/low splits (SC with SCA, TC with TCA).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub correlations: Vec<Correlation>,
    pub splits: Vec<MetricSplit>,
}

pub fn correlation_report(
    assessments: &[RegionAssessment],
    metrics: &MetricTable,
) -> Result<CorrelationReport> {
    let correlations = correlate(assessments, metrics)?;
    let mut splits = split_by_label(assessments, metrics, LabelKind::Sca)?;
    splits.extend(split_by_label(assessments, metrics, LabelKind::Tca)?);
    splits.sort_by(|a, b| a.metric_name.cmp(&b.metric_name));
    Ok(CorrelationReport {
        correlations,
        splits,
    })
}

pub const CORRELATION_COLUMNS: [&str; 10] = [
    "metric", "against", "n", "r", "r_x100", "label", "high_n", "high_mean", "low_n", "low_mean",
];

fn opt_fixed(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl CorrelationReport {
    fn split(&self, metric: &str, by: LabelKind) -> Option<&MetricSplit> {
        self.splits.iter().find(|s| s.metric_name == metric && s.by == by)
    }

    /// One row per (metric, coverage) pair with the split of the matching label.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::io("writing CSV", std::io::Error::other(e.to_string()));
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(CORRELATION_COLUMNS).map_err(io)?;
        for c in &self.correlations {
            let label = c.against.label();
            let split = self.split(&c.metric_name, label);
            let (hn, hm, ln, lm) = match split {
                Some(s) => (s.high.len(), s.high.mean, s.low.len(), s.low.mean),
                None => (0, None, 0, None),
            };
            w.write_record([
                c.metric_name.clone(),
                c.against.as_str().to_owned(),
                c.n.to_string(),
                format!("{:.6}", c.r),
                format!("{:.6}", c.r_x100),
                match label {
                    LabelKind::Sca => "sca".to_owned(),
                    LabelKind::Tca => "tca".to_owned(),
                },
                hn.to_string(),
                opt_fixed(hm),
                ln.to_string(),
                opt_fixed(lm),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::io("writing CSV", e))
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        out.write_all(text.as_bytes())
            .map_err(|e| Error::io("writing correlation report", e))
    }
}
