//! Literal nested-loop reference for region assessment.
//!
//! Shares no code with [`crate::coverage`]: membership is a linear scan of the
//! filter's label list and every sum is an explicit loop over `(t, h, w)`.
//! Only compiled for tests or with the `oracle` feature.

use crate::coverage::{Assessment, AssessmentConfig, RegionAssessment};
use crate::error::{Error, Result};
use crate::scl::{SceneSeries, ValidationMode};

fn in_filter(members: &[u8], code: u8) -> bool {
    let mut hit = false;
    for &m in members {
        if m == code {
            hit = true;
        }
    }
    hit
}

pub fn oracle_assess(series: &SceneSeries, config: &AssessmentConfig) -> Result<RegionAssessment> {
    let members: Vec<u8> = config.filter.members().iter().map(|l| l.code()).collect();
    let masks = series.masks();
    let t_len = masks.len();
    if t_len == 0 {
        return Err(Error::EmptySeries);
    }
    let w_len = series.width();
    let h_len = series.height();

    let mut sc_per_step = Vec::new();
    let mut total_hits: u64 = 0;
    for mask in masks {
        let mut hits: u64 = 0;
        for h in 0..h_len {
            for w in 0..w_len {
                let index = h * w_len + w;
                let code = mask.labels()[index];
                if code > 11 && config.mode == ValidationMode::Strict {
                    return Err(Error::InvalidMask { index, value: code });
                }
                if in_filter(&members, code) {
                    hits += 1;
                }
            }
        }
        total_hits += hits;
        sc_per_step.push(hits as f64 / (w_len * h_len) as f64);
    }
    let sc = total_hits as f64 / (t_len * w_len * h_len) as f64;

    let mut passing: u64 = 0;
    for &sct in &sc_per_step {
        if sct >= config.step_thresh {
            passing += 1;
        }
    }
    let tc = passing as f64 / t_len as f64;

    let sca = if sc >= config.sc_thresh { Assessment::High } else { Assessment::Low };
    let tca = if tc >= config.tc_thresh { Assessment::High } else { Assessment::Low };
    Ok(RegionAssessment {
        region_id: series.region_id().to_owned(),
        sc_per_step,
        sc,
        tc,
        sca,
        tca,
        n_steps: t_len,
    })
}
