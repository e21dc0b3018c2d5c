//! Group-level aggregation and CSV / JSON report emission.
//!
//! Quantiles use linear interpolation between order statistics (R type 7),
//! outliers are values strictly outside the Tukey fences
//! `[q1 - 1.5 IQR, q3 + 1.5 IQR]`. Integer percentages are rounded half to
//! even on the exact count ratio.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::coverage::{Assessment, RegionAssessment};
use crate::error::{Error, Result};

/// Group name for regions without one.
pub const UNGROUPED: &str = "ungrouped";

pub const ASSESSMENT_COLUMNS: [&str; 7] = ["region_id", "group", "n_steps", "sc", "tc", "sca", "tca"];

pub const SUMMARY_COLUMNS: [&str; 14] = [
    "group",
    "n_regions",
    "sc_mean",
    "sc_median",
    "sc_q1",
    "sc_q3",
    "tc_mean",
    "tc_median",
    "tc_q1",
    "tc_q3",
    "n_low_sca",
    "pct_low_sca",
    "n_low_tca",
    "pct_low_tca",
];

/// Region id to optional group name.
pub type GroupMap = BTreeMap<String, Option<String>>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistStats {
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
    pub outlier_region_ids: Vec<String>,
}

/// Type-7 quantile of an ascending, non-empty slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl DistStats {
    /// Statistics of `(region_id, value)` pairs. Outlier ids come out sorted.
    pub fn from_values(values: &[(&str, f64)]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut sorted: Vec<f64> = values.iter().map(|(_, v)| *v).collect();
        sorted.sort_by(f64::total_cmp);
        let mean = values.iter().map(|(_, v)| v).sum::<f64>() / values.len() as f64;
        let q1 = quantile_sorted(&sorted, 0.25);
        let median = quantile_sorted(&sorted, 0.5);
        let q3 = quantile_sorted(&sorted, 0.75);
        let iqr = q3 - q1;
        let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let mut outlier_region_ids: Vec<String> = values
            .iter()
            .filter(|(_, v)| *v < lo_fence || *v > hi_fence)
            .map(|(id, _)| (*id).to_owned())
            .collect();
        outlier_region_ids.sort();
        Ok(DistStats {
            mean,
            median,
            q1,
            q3,
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            outlier_region_ids,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub group: String,
    pub n_regions: usize,
    pub sc_stats: DistStats,
    pub tc_stats: DistStats,
    pub n_low_tca: usize,
    /// Full-precision percentage.
    pub pct_low_tca: f64,
    pub n_low_sca: usize,
    pub pct_low_sca: f64,
}

impl GroupSummary {
    pub fn pct_low_tca_rounded(&self) -> u64 {
        round_percent_half_even(self.n_low_tca as u64, self.n_regions as u64)
    }

    pub fn pct_low_sca_rounded(&self) -> u64 {
        round_percent_half_even(self.n_low_sca as u64, self.n_regions as u64)
    }
}

/// `100 * part / whole` rounded to an integer, ties to even, computed exactly.
pub fn round_percent_half_even(part: u64, whole: u64) -> u64 {
    assert!(whole > 0, "percentage of an empty group");
    let scaled = 100 * part;
    let (q, r) = (scaled / whole, scaled % whole);
    match (2 * r).cmp(&whole) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => q + (q & 1),
    }
}

fn group_of<'a>(groups: &'a GroupMap, region_id: &str) -> &'a str {
    groups
        .get(region_id)
        .and_then(|g| g.as_deref())
        .unwrap_or(UNGROUPED)
}

/// Assessments bucketed by group name, each bucket sorted by region id.
fn bucket<'a>(
    assessments: &'a [RegionAssessment],
    groups: &'a GroupMap,
) -> BTreeMap<&'a str, Vec<&'a RegionAssessment>> {
    let mut buckets: BTreeMap<&str, Vec<&RegionAssessment>> = BTreeMap::new();
    for a in assessments {
        buckets.entry(group_of(groups, &a.region_id)).or_default().push(a);
    }
    for members in buckets.values_mut() {
        members.sort_by(|a, b| a.region_id.cmp(&b.region_id));
    }
    buckets
}

fn summarize(group: &str, members: &[&RegionAssessment]) -> Result<GroupSummary> {
    let sc: Vec<(&str, f64)> = members.iter().map(|a| (a.region_id.as_str(), a.sc)).collect();
    let tc: Vec<(&str, f64)> = members.iter().map(|a| (a.region_id.as_str(), a.tc)).collect();
    let n = members.len();
    let n_low_tca = members.iter().filter(|a| a.tca == Assessment::Low).count();
    let n_low_sca = members.iter().filter(|a| a.sca == Assessment::Low).count();
    Ok(GroupSummary {
        group: group.to_owned(),
        n_regions: n,
        sc_stats: DistStats::from_values(&sc)?,
        tc_stats: DistStats::from_values(&tc)?,
        n_low_tca,
        pct_low_tca: 100.0 * n_low_tca as f64 / n as f64,
        n_low_sca,
        pct_low_sca: 100.0 * n_low_sca as f64 / n as f64,
    })
}

/// One summary per group, sorted by group name.
pub fn aggregate(assessments: &[RegionAssessment], groups: &GroupMap) -> Result<Vec<GroupSummary>> {
    if assessments.is_empty() {
        return Err(Error::EmptyInput);
    }
    bucket(assessments, groups)
        .into_iter()
        .map(|(g, members)| summarize(g, &members))
        .collect()
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("writing CSV", io),
        other => Error::io(
            "writing CSV",
            std::io::Error::other(format!("{other:?}")),
        ),
    }
}

fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

/// Writes one row per assessment, in the order given.
pub fn emit_assessments_csv<W: Write>(
    assessments: &[RegionAssessment],
    groups: &GroupMap,
    out: W,
) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(ASSESSMENT_COLUMNS).map_err(csv_err)?;
    for a in assessments {
        let group = groups.get(&a.region_id).and_then(|g| g.as_deref()).unwrap_or("");
        w.write_record([
            a.region_id.as_str(),
            group,
            &a.n_steps.to_string(),
            &fixed(a.sc),
            &fixed(a.tc),
            a.sca.as_str(),
            a.tca.as_str(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("writing CSV", e))
}

pub fn emit_summaries_csv<W: Write>(summaries: &[GroupSummary], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(SUMMARY_COLUMNS).map_err(csv_err)?;
    for s in summaries {
        w.write_record([
            s.group.clone(),
            s.n_regions.to_string(),
            fixed(s.sc_stats.mean),
            fixed(s.sc_stats.median),
            fixed(s.sc_stats.q1),
            fixed(s.sc_stats.q3),
            fixed(s.tc_stats.mean),
            fixed(s.tc_stats.median),
            fixed(s.tc_stats.q1),
            fixed(s.tc_stats.q3),
            s.n_low_sca.to_string(),
            fixed(s.pct_low_sca),
            s.n_low_tca.to_string(),
            fixed(s.pct_low_tca),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("writing CSV", e))
}

#[derive(Serialize)]
struct AssessmentRecord<'a> {
    region_id: &'a str,
    group: Option<&'a str>,
    n_steps: usize,
    sc: f64,
    tc: f64,
    sca: Assessment,
    tca: Assessment,
    sc_per_step: &'a [f64],
}

/// JSON array of assessments including the per-step trace.
pub fn emit_assessments_json<W: Write>(
    assessments: &[RegionAssessment],
    groups: &GroupMap,
    mut out: W,
) -> Result<()> {
    let records: Vec<AssessmentRecord> = assessments
        .iter()
        .map(|a| AssessmentRecord {
            region_id: &a.region_id,
            group: groups.get(&a.region_id).and_then(|g| g.as_deref()),
            n_steps: a.n_steps,
            sc: a.sc,
            tc: a.tc,
            sca: a.sca,
            tca: a.tca,
            sc_per_step: &a.sc_per_step,
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&records).expect("assessments serialize");
    text.push('\n');
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("writing assessments", e))
}

/// Data behind one group's coverage boxplots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupPlotData {
    pub region_ids: Vec<String>,
    pub sc: Vec<f64>,
    pub tc: Vec<f64>,
    pub sc_stats: DistStats,
    pub tc_stats: DistStats,
    pub n_regions: usize,
    pub n_low_sca: usize,
    pub pct_low_sca_rounded: u64,
    pub n_low_tca: usize,
    pub pct_low_tca_rounded: u64,
}

pub fn plot_data(
    assessments: &[RegionAssessment],
    groups: &GroupMap,
) -> Result<BTreeMap<String, GroupPlotData>> {
    bucket(assessments, groups)
        .into_iter()
        .map(|(g, members)| {
            let summary = summarize(g, &members)?;
            let data = GroupPlotData {
                region_ids: members.iter().map(|a| a.region_id.clone()).collect(),
                sc: members.iter().map(|a| a.sc).collect(),
                tc: members.iter().map(|a| a.tc).collect(),
                pct_low_sca_rounded: summary.pct_low_sca_rounded(),
                pct_low_tca_rounded: summary.pct_low_tca_rounded(),
                sc_stats: summary.sc_stats,
                tc_stats: summary.tc_stats,
                n_regions: summary.n_regions,
                n_low_sca: summary.n_low_sca,
                n_low_tca: summary.n_low_tca,
            };
            Ok((g.to_owned(), data))
        })
        .collect()
}

/// Pretty JSON object keyed by group name, with a trailing newline.
pub fn emit_plot_data<W: Write>(
    assessments: &[RegionAssessment],
    groups: &GroupMap,
    mut out: W,
) -> Result<()> {
    let data = plot_data(assessments, groups)?;
    let mut text = serde_json::to_string_pretty(&data).expect("plot data serializes");
    text.push('\n');
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("writing plot data", e))
}
