//! Exit-gate criteria. Run with `--nocapture` to see the per-criterion lines:
//!
//! ```text
//! cargo test -p sitscov --test acceptance -- --nocapture
//! ```

mod common;

use std::fs;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sitscov_core::coverage::{assess_region, Assessment, AssessmentConfig, RegionAssessment};
use sitscov_core::oracle::oracle_assess;
use sitscov_core::report::{aggregate, GroupMap};
use sitscov_core::stats::pearson;
use sitscov_core::synth::{generate, SynthDataset, SynthSpec};
use sitscov_core::{pipeline, spatial_coverage_region, LabelFilter, LabelSet, SceneMask, SceneSeries, ValidationMode};

use common::*;

struct Outcome {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn criterion(id: u8, name: &'static str, f: impl FnOnce() -> Result<String, String>) -> Outcome {
    let (pass, detail) = match f() {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    println!("[{}] criterion {id}: {name} :: {detail}", if pass { "PASS" } else { "FAIL" });
    Outcome { id, name, pass, detail }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn random_filter(rng: &mut StdRng) -> LabelFilter {
    match rng.gen_range(0..4) {
        0 => LabelFilter::all_but_cloud(),
        1 => LabelFilter::veg_non_veg(),
        // proper non-empty subsets so every clean_prob is admissible
        _ => LabelFilter::custom(LabelSet::from_bits(rng.gen_range(1..(1u16 << 12) - 1))).unwrap(),
    }
}

fn dates(n: usize) -> Vec<NaiveDate> {
    let d0 = NaiveDate::from_ymd_opt(2018, 1, 1).unwrap();
    (0..n).map(|i| d0 + chrono::Days::new(5 * i as u64)).collect()
}

fn random_thresh(rng: &mut StdRng) -> f64 {
    // mix of grid values (hit exact k/T ties) and arbitrary reals
    if rng.gen_bool(0.5) { rng.gen_range(0..=20) as f64 / 20.0 } else { rng.gen_range(0.0..=1.0) }
}

fn oracle_equivalence() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(1);
    let started = Instant::now();
    let n = 1200;
    for i in 0..n {
        let spec = SynthSpec {
            width: rng.gen_range(1..=32),
            height: rng.gen_range(1..=32),
            n_steps: rng.gen_range(1..=20),
            seed: rng.gen(),
            clean_prob: if i % 10 == 0 { [0.0, 1.0][i / 10 % 2] } else { rng.gen_range(0.0..=1.0) },
            filter: random_filter(&mut rng),
        };
        let series = generate(&spec).map_err(|e| e.to_string())?;
        let mut cfg = AssessmentConfig::new(spec.filter, random_thresh(&mut rng));
        cfg.step_thresh = random_thresh(&mut rng);
        cfg.tc_thresh = random_thresh(&mut rng);
        let fast = assess_region(&series, &cfg).map_err(|e| e.to_string())?;
        let slow = oracle_assess(&series, &cfg).map_err(|e| e.to_string())?;
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        ensure(
            bits(&fast.sc_per_step) == bits(&slow.sc_per_step)
                && fast.sc.to_bits() == slow.sc.to_bits()
                && fast.tc.to_bits() == slow.tc.to_bits()
                && fast.sca == slow.sca
                && fast.tca == slow.tca
                && fast.n_steps == slow.n_steps,
            || format!("series {i} differs: {fast:?} vs {slow:?}"),
        )?;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("{n} series bit-exact in {:.2}s (limit 30s)", elapsed.as_secs_f64()))
}

fn filter_monotonicity() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(2);
    let series: Vec<SceneSeries> = (0..200)
        .map(|_| {
            let (w, h, t) = (rng.gen_range(1..=32), rng.gen_range(1..=32), rng.gen_range(1..=10));
            let masks = (0..t)
                .map(|_| SceneMask::new(w, h, (0..w * h).map(|_| rng.gen_range(0..12u8)).collect()).unwrap())
                .collect();
            SceneSeries::new("m", dates(t), masks).unwrap()
        })
        .collect();
    let mut pairs = vec![(LabelFilter::veg_non_veg(), LabelFilter::all_but_cloud())];
    while pairs.len() < 60 {
        let small: u16 = rng.gen_range(1..(1 << 12));
        let big = small | rng.gen_range(1..(1u16 << 12));
        if big == small {
            continue;
        }
        pairs.push((
            LabelFilter::custom(LabelSet::from_bits(small)).unwrap(),
            LabelFilter::custom(LabelSet::from_bits(big)).unwrap(),
        ));
    }
    let mut violations = 0;
    let mut checks = 0;
    for (k1, k2) in &pairs {
        assert!(k1.members().is_subset(k2.members()) && k1.members() != k2.members());
        let thresh = random_thresh(&mut rng);
        for s in &series {
            let a1 = assess_region(s, &AssessmentConfig::new(*k1, thresh)).unwrap();
            let a2 = assess_region(s, &AssessmentConfig::new(*k2, thresh)).unwrap();
            checks += 1;
            if a1.sc > a2.sc || a1.tc > a2.tc || a1.sc_per_step.iter().zip(&a2.sc_per_step).any(|(x, y)| x > y) {
                violations += 1;
            }
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok(format!("{} series x {} nested pairs = {checks} checks, 0 violations", series.len(), pairs.len()))
}

fn paper_counts() -> Result<String, String> {
    // (group, regions, low TCA, stated integer percentage)
    let table = [
        ("Africa", 1980, 230, 12),
        ("Asia", 2753, 435, 16),
        ("Australia", 600, 38, 5),
        ("Europe", 840, 255, 30),
        ("North America", 1561, 46, 3),
        ("South America", 1200, 124, 15),
    ];
    let mut assessments = Vec::new();
    let mut groups = GroupMap::new();
    for (g, n, low, _) in table {
        for i in 0..n {
            let id = format!("{g}-{i:04}");
            let tca = if i < low { Assessment::Low } else { Assessment::High };
            let tc = if i < low { 0.25 } else { 0.75 };
            groups.insert(id.clone(), Some(g.to_owned()));
            assessments.push(RegionAssessment {
                region_id: id,
                sc_per_step: vec![tc],
                sc: tc,
                tc,
                sca: tca,
                tca,
                n_steps: 1,
            });
        }
    }
    let summaries = aggregate(&assessments, &groups).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    for ((g, n, low, stated), s) in table.iter().zip(&summaries) {
        ensure(s.group == *g && s.n_regions == *n && s.n_low_tca == *low, || format!("bad tally for {g}"))?;
        let computed = s.pct_low_tca_rounded();
        let expected = match *g {
            "Australia" => 6,
            "South America" => 10,
            _ => *stated,
        };
        ensure(computed == expected, || format!("{g}: computed {computed}%, expected {expected}%"))?;
        if computed != *stated {
            lines.push(format!(
                "{g}: {low}/{n} = {:.2}% -> {computed}% (published figure states {stated}%)",
                s.pct_low_tca
            ));
        }
    }
    Ok(format!(
        "Africa 12, Asia 16, Europe 30, N. America 3 reproduced; note: {}",
        lines.join("; ")
    ))
}

fn threshold_boundaries() -> Result<String, String> {
    let mut report = Vec::new();
    for preset in [AssessmentConfig::LANDCOVERNET_THRESH, AssessmentConfig::DEFAULT_THRESH] {
        let clean = (preset * 10.0).round() as usize;
        // every step has exactly `clean` of 10 pixels clean -> SC_t = SC = preset
        let mut step = vec![9u8; 10];
        step[..clean].fill(4);
        let at = SceneSeries::new("at", dates(3), vec![SceneMask::new(10, 1, step.clone()).unwrap(); 3]).unwrap();
        let cfg = AssessmentConfig::new(LabelFilter::veg_non_veg(), preset);
        let a = assess_region(&at, &cfg).unwrap();
        ensure(a.sc == preset && a.sca == Assessment::High, || format!("sc {} at {preset} -> {:?}", a.sc, a.sca))?;
        ensure(a.tc == 1.0 && a.tca == Assessment::High, || format!("each step at threshold should pass: tc {}", a.tc))?;

        step[clean - 1] = 9;
        let below = SceneSeries::new("below", dates(1), vec![SceneMask::new(10, 1, step).unwrap()]).unwrap();
        let b = assess_region(&below, &cfg).unwrap();
        ensure(b.sca == Assessment::Low && b.tca == Assessment::Low, || "one pixel below is not low".into())?;

        // TC = k/T landing exactly on the threshold: T = 10, k = 10 * preset
        let masks: Vec<SceneMask> = (0..10)
            .map(|t| SceneMask::filled(2, 2, if t < clean { 4 } else { 8 }).unwrap())
            .collect();
        let s = SceneSeries::new("tc", dates(10), masks).unwrap();
        let a = assess_region(&s, &cfg).unwrap();
        ensure(a.tc == preset && a.tca == Assessment::High, || format!("tc {} at {preset} -> {:?}", a.tc, a.tca))?;
        let masks: Vec<SceneMask> = (0..10)
            .map(|t| SceneMask::filled(2, 2, if t + 1 < clean { 4 } else { 8 }).unwrap())
            .collect();
        let s = SceneSeries::new("tc-", dates(10), masks).unwrap();
        ensure(assess_region(&s, &cfg).unwrap().tca == Assessment::Low, || "k-1 steps not low".into())?;
        report.push(format!("{preset}: sc=={preset} high, tc={clean}/10 high"));
    }
    // T = 4 with k = 2 at the 0.5 preset
    let masks: Vec<SceneMask> = [4u8, 9, 4, 9].iter().map(|&c| SceneMask::filled(3, 3, c).unwrap()).collect();
    let s = SceneSeries::new("t4", dates(4), masks).unwrap();
    let a = assess_region(&s, &AssessmentConfig::new(LabelFilter::veg_non_veg(), 0.5)).unwrap();
    ensure(a.tc == 0.5 && a.tca == Assessment::High && a.sca == Assessment::High, || format!("{a:?}"))?;
    report.push("0.5: tc=2/4 high".into());
    Ok(report.join("; "))
}

fn determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    let out = synth(dir.path(), &[
        "--regions", "100", "--width", "32", "--height", "32", "--steps", "20", "--min-steps", "5",
        "--seed", "5", "--clean-prob", "0.2", "--clean-prob-max", "0.95", "--groups", "Africa,Asia,Europe,Australia",
    ]);
    ensure(out.status.success(), || stderr(&out))?;
    let manifest = dir.path().join("manifest.json");
    let mut outputs = Vec::new();
    for p in ["1", "8"] {
        let out = run(["assess", "--manifest", manifest.to_str().unwrap(), "--parallelism", p]);
        ensure(out.status.success(), || stderr(&out))?;
        outputs.push(out.stdout);
    }
    ensure(outputs[0] == outputs[1], || "outputs differ".into())?;
    let rows = outputs[0].iter().filter(|&&b| b == b'\n').count() - 1;
    ensure(rows == 100, || format!("{rows} rows"))?;
    Ok(format!("parallelism 1 vs 8: {rows} rows, {} bytes identical", outputs[0].len()))
}

fn synth_sanity() -> Result<String, String> {
    let f = LabelFilter::all_but_cloud();
    let spec = |p: f64| SynthSpec { width: 256, height: 256, n_steps: 20, seed: 2018, clean_prob: p, filter: f };
    let sc = |p: f64| {
        let s = generate(&spec(p)).unwrap();
        spatial_coverage_region(&s, &f, ValidationMode::Strict).unwrap().sc
    };
    let mid = sc(0.6);
    ensure((0.59..=0.61).contains(&mid), || format!("mean SC {mid}"))?;
    let (lo, hi) = (sc(0.0), sc(1.0));
    ensure(lo == 0.0 && hi == 1.0, || format!("extremes {lo} {hi}"))?;
    Ok(format!("clean_prob 0.6 -> SC {mid:.5} in [0.59, 0.61]; 0 -> {lo}; 1 -> {hi}"))
}

fn pearson_textbook(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mut sx, mut sy, mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sx += a;
        sy += b;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

fn pearson_oracle() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut worst_affine: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(2..200);
        let x: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let slope = rng.gen_range(-2.0..2.0);
        let y: Vec<f64> = x.iter().map(|v| slope * v + rng.gen::<f64>()).collect();
        let r = pearson(&x, &y).map_err(|e| e.to_string())?;
        worst = worst.max((r - pearson_textbook(&x, &y)).abs());
        let (a, b) = (rng.gen_range(0.1..10.0), rng.gen_range(-5.0..5.0));
        let (c, d) = (rng.gen_range(0.1..10.0), rng.gen_range(-5.0..5.0));
        let xa: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let ya: Vec<f64> = y.iter().map(|v| c * v + d).collect();
        worst_affine = worst_affine.max((r - pearson(&xa, &ya).unwrap()).abs());
        worst_affine = worst_affine.max((r - pearson(&y, &x).unwrap()).abs());
    }
    ensure(worst < 1e-12 && worst_affine < 1e-12, || format!("max diff {worst:e}, affine {worst_affine:e}"))?;
    Ok(format!("max |r - formula| = {worst:.1e}, max affine/symmetry diff = {worst_affine:.1e} (tol 1e-12)"))
}

fn throughput() -> Result<String, String> {
    let ds = SynthDataset {
        name: "throughput".into(),
        n_regions: 1000,
        width: 256,
        height: 256,
        min_steps: 60,
        max_steps: 60,
        seed: 2018,
        clean_prob_min: 0.2,
        clean_prob_max: 0.95,
        filter: LabelFilter::all_but_cloud(),
        groups: vec![],
    };
    let started = Instant::now();
    let out = pipeline::assess_synthetic(&ds, &AssessmentConfig::new(LabelFilter::all_but_cloud(), 0.5), 0)
        .map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    ensure(out.len() == 1000, || format!("{} regions", out.len()))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {:.1}s", elapsed.as_secs_f64()))?;
    Ok(format!(
        "1000 x 256x256 x 60 generated + assessed in {:.1}s on {} thread(s) (limit 60s)",
        elapsed.as_secs_f64(),
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    ))
}

fn golden_files() -> Result<String, String> {
    let g = golden_dir();
    let manifest = g.join("manifest.json");
    let m = manifest.to_str().unwrap();
    let assess = run(["assess", "--manifest", m]);
    ensure(assess.status.success(), || stderr(&assess))?;
    ensure(assess.stdout == fs::read(g.join("expected_assess.csv")).unwrap(), || "assessment CSV differs".into())?;

    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("plot.json");
    let summary = run(["aggregate", "--manifest", m, "--plot-data", plot.to_str().unwrap()]);
    ensure(summary.status.success(), || stderr(&summary))?;
    ensure(summary.stdout == fs::read(g.join("expected_summary.csv")).unwrap(), || "summary CSV differs".into())?;
    ensure(fs::read(&plot).unwrap() == fs::read(g.join("expected_plot.json")).unwrap(), || "plot JSON differs".into())?;
    Ok("assessment CSV, summary CSV and plot-data JSON byte-identical".into())
}

#[test]
fn acceptance_criteria() {
    let outcomes = [
        criterion(1, "oracle equivalence", oracle_equivalence),
        criterion(2, "filter monotonicity", filter_monotonicity),
        criterion(3, "published count cross-check", paper_counts),
        criterion(4, "threshold boundaries", threshold_boundaries),
        criterion(5, "parallel determinism", determinism),
        criterion(6, "synthetic generator sanity", synth_sanity),
        criterion(7, "pearson oracle", pearson_oracle),
        criterion(8, "desk-scale throughput", throughput),
        criterion(9, "golden files", golden_files),
    ];
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.pass)
        .map(|o| format!("{} ({}): {}", o.id, o.name, o.detail))
        .collect();
    println!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    assert!(failed.is_empty(), "failed criteria: {failed:#?}");
}
