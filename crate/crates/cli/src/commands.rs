use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use log::info;
use sitscov_core::report::{self, GroupMap};
use sitscov_core::stats::{correlation_report, MetricTable};
use sitscov_core::{
    ingest, parse_filter, pipeline, AssessmentConfig, DatasetManifest, Error, RegionAssessment,
    SynthDataset, ValidationMode,
};

use crate::{AggregateArgs, AssessArgs, CorrelateArgs, Format, Mode, Preset, RunArgs, SynthArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Data(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn config_from(run: &RunArgs) -> CliResult<AssessmentConfig> {
    let filter = parse_filter(&run.filter).map_err(|e| CliError::Usage(e.to_string()))?;
    let base = match run.preset {
        Preset::Ai4eo => AssessmentConfig::DEFAULT_THRESH,
        Preset::Landcovernet => AssessmentConfig::LANDCOVERNET_THRESH,
    };
    let mode = if run.lax || run.mode == Mode::Lax {
        ValidationMode::Lax
    } else {
        ValidationMode::Strict
    };
    let config = AssessmentConfig {
        filter,
        sc_thresh: run.sc_thresh.unwrap_or(base),
        step_thresh: run.step_thresh.unwrap_or(base),
        tc_thresh: run.tc_thresh.unwrap_or(base),
        mode,
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

fn open_manifest(path: &Path) -> CliResult<DatasetManifest> {
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "manifest {} does not exist",
            path.display()
        )));
    }
    Ok(ingest::load_manifest(path)?)
}

struct Assessed {
    manifest: DatasetManifest,
    assessments: Vec<RegionAssessment>,
    groups: GroupMap,
}

fn run_assessment(run: &RunArgs) -> CliResult<Assessed> {
    let config = config_from(run)?;
    let manifest = open_manifest(&run.manifest)?;
    let started = Instant::now();
    let assessments = pipeline::assess_manifest(&manifest, &config, run.parallelism)?;
    info!(
        "dataset={} filter={} sc_thresh={} step_thresh={} tc_thresh={} mode={:?} regions={} wall_time={:.3}s",
        manifest.dataset_name,
        config.filter,
        config.sc_thresh,
        config.step_thresh,
        config.tc_thresh,
        config.mode,
        assessments.len(),
        started.elapsed().as_secs_f64()
    );
    let groups = manifest.groups();
    Ok(Assessed {
        manifest,
        assessments,
        groups,
    })
}

/// Writes the whole buffer at once, so failed runs leave no partial output.
fn deliver(out: Option<&Path>, bytes: &[u8]) -> CliResult {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| {
            CliError::Data(Error::Io {
                context: format!("writing {}", path.display()),
                source: e,
            })
        }),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| {
                    CliError::Data(Error::Io {
                        context: "writing stdout".into(),
                        source: e,
                    })
                })
        }
    }
}

pub fn assess(args: AssessArgs) -> CliResult {
    let run = args.run;
    let a = run_assessment(&run)?;
    let mut buf = Vec::new();
    match run.format {
        Format::Csv => report::emit_assessments_csv(&a.assessments, &a.groups, &mut buf)?,
        Format::Json => report::emit_assessments_json(&a.assessments, &a.groups, &mut buf)?,
    }
    deliver(run.out.as_deref(), &buf)
}

pub fn aggregate(args: AggregateArgs) -> CliResult {
    let run = args.run;
    let a = run_assessment(&run)?;
    let summaries = report::aggregate(&a.assessments, &a.groups)?;
    for s in &summaries {
        info!(
            "group={} regions={} low_sca={} ({}%) low_tca={} ({}%)",
            s.group,
            s.n_regions,
            s.n_low_sca,
            s.pct_low_sca_rounded(),
            s.n_low_tca,
            s.pct_low_tca_rounded()
        );
    }
    let mut plot = Vec::new();
    report::emit_plot_data(&a.assessments, &a.groups, &mut plot)?;
    let main = match run.format {
        Format::Csv => {
            let mut buf = Vec::new();
            report::emit_summaries_csv(&summaries, &mut buf)?;
            buf
        }
        Format::Json => plot.clone(),
    };
    if let Some(path) = &args.plot_data {
        deliver(Some(path), &plot)?;
    }
    deliver(run.out.as_deref(), &main)
}

pub fn correlate(args: CorrelateArgs) -> CliResult {
    let run = args.run;
    let file = fs::File::open(&args.metrics).map_err(|e| {
        CliError::Usage(format!("cannot open metrics {}: {e}", args.metrics.display()))
    })?;
    let metrics = MetricTable::from_csv(io::BufReader::new(file))?;
    let a = run_assessment(&run)?;
    info!(
        "metrics={} rows={} dataset={}",
        args.metrics.display(),
        metrics.len(),
        a.manifest.dataset_name
    );
    let rep = correlation_report(&a.assessments, &metrics)?;
    for c in &rep.correlations {
        info!(
            "{} vs {}: r={:.4} (x100 = {:.1}, n={})",
            c.metric_name,
            c.against.as_str(),
            c.r,
            c.r_x100,
            c.n
        );
    }
    let mut buf = Vec::new();
    match run.format {
        Format::Csv => rep.write_csv(&mut buf)?,
        Format::Json => rep.write_json(&mut buf)?,
    }
    deliver(run.out.as_deref(), &buf)
}

pub fn synth(args: SynthArgs) -> CliResult {
    let filter = parse_filter(&args.filter).map_err(|e| CliError::Usage(e.to_string()))?;
    let dataset = SynthDataset {
        name: args.name,
        n_regions: args.regions,
        width: args.width,
        height: args.height,
        min_steps: args.min_steps.unwrap_or(args.steps),
        max_steps: args.steps,
        seed: args.seed,
        clean_prob_min: args.clean_prob,
        clean_prob_max: args.clean_prob_max.unwrap_or(args.clean_prob),
        filter,
        groups: args.groups.into_iter().filter(|g| !g.is_empty()).collect(),
    };
    dataset
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    fs::create_dir_all(&args.out).map_err(|e| {
        CliError::Data(Error::Io {
            context: format!("creating {}", args.out.display()),
            source: e,
        })
    })?;
    let started = Instant::now();
    let manifest = dataset.write(&args.out)?;
    info!(
        "dataset={} regions={} size={}x{} steps={}..={} seed={} clean_prob={}..={} filter={} wall_time={:.3}s",
        dataset.name,
        manifest.regions.len(),
        dataset.width,
        dataset.height,
        dataset.min_steps,
        dataset.max_steps,
        dataset.seed,
        dataset.clean_prob_min,
        dataset.clean_prob_max,
        dataset.filter,
        started.elapsed().as_secs_f64()
    );
    Ok(())
}
