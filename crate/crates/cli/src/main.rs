//! `sitscov`: clean coverage assessment of scene classification time series.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "sitscov", version, about = "Spatio-temporal clean coverage of SCL time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Assess every region of a dataset.
    Assess(AssessArgs),
    /// Per-group summaries and boxplot data.
    Aggregate(AggregateArgs),
    /// Correlate coverage with per-region model metrics.
    Correlate(CorrelateArgs),
    /// Write a seeded synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Thresholds of 0.7.
    Ai4eo,
    /// Thresholds of 0.5.
    Landcovernet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Strict,
    Lax,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Dataset manifest (JSON).
    #[arg(long)]
    pub manifest: PathBuf,
    /// `all-but-cloud`, `veg-non-veg` or a comma-separated code list.
    #[arg(long, default_value = "all-but-cloud")]
    pub filter: String,
    #[arg(long)]
    pub sc_thresh: Option<f64>,
    #[arg(long)]
    pub step_thresh: Option<f64>,
    #[arg(long)]
    pub tc_thresh: Option<f64>,
    /// Threshold defaults; explicit threshold flags take precedence.
    #[arg(long, value_enum, default_value = "ai4eo")]
    pub preset: Preset,
    #[arg(long, value_enum, default_value = "strict")]
    pub mode: Mode,
    /// Shorthand for `--mode lax`.
    #[arg(long, conflicts_with = "mode")]
    pub lax: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub parallelism: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Also write the boxplot JSON here.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// CSV with header `region_id,metric_name,value`.
    #[arg(long)]
    pub metrics: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory; receives `manifest.json` and `rasters/`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "synthetic")]
    pub name: String,
    #[arg(long, default_value_t = 10)]
    pub regions: usize,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    /// Steps per region (the maximum when `--min-steps` is given).
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    #[arg(long)]
    pub min_steps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-pixel probability of a clean label (the minimum when
    /// `--clean-prob-max` is given).
    #[arg(long, default_value_t = 0.6)]
    pub clean_prob: f64,
    #[arg(long)]
    pub clean_prob_max: Option<f64>,
    #[arg(long, default_value = "all-but-cloud")]
    pub filter: String,
    /// Comma-separated group names assigned round-robin.
    #[arg(long, value_delimiter = ',')]
    pub groups: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Assess(args) => commands::assess(args),
        Command::Aggregate(args) => commands::aggregate(args),
        Command::Correlate(args) => commands::correlate(args),
        Command::Synth(args) => commands::synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
