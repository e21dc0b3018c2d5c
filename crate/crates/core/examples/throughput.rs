use std::time::Instant;

use sitscov_core::{pipeline, AssessmentConfig, LabelFilter, SynthDataset};

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let ds = SynthDataset {
        name: "throughput".into(),
        n_regions: n,
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
    let t = Instant::now();
    let out = pipeline::assess_synthetic(&ds, &AssessmentConfig::default(), 0).unwrap();
    println!("{} regions in {:.2}s", out.len(), t.elapsed().as_secs_f64());
}
