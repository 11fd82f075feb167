mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  usage error
  3  validation error (bad input file, scenario or argument)
  4  numerical divergence or too many failed frames
  5  I/O error";

#[derive(Debug, Parser)]
#[command(name = "synthcrowd", version, about = "Synthetic multi-person frames with dense UV, depth and joint ground truth", after_help = EXIT_CODES)]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "SYNTHCROWD_THREADS")]
    threads: Option<usize>,
    /// Adds wall-clock timings to run manifests, which then differ between runs.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fits avatar shape and per-frame pose to a skeleton sequence.
    #[command(after_help = EXIT_CODES)]
    Fit(FitArgs),
    /// Labels an avatar texture by voting over rendered views.
    #[command(after_help = EXIT_CODES)]
    Scan(ScanArgs),
    /// Renders a scenario into per-frame bundles.
    #[command(after_help = EXIT_CODES)]
    Generate(GenerateArgs),
    /// Composites a rendered bundle onto a background plate.
    #[command(after_help = EXIT_CODES)]
    Compose(ComposeArgs),
    /// Scores predicted UV/depth bundles against ground-truth bundles.
    #[command(after_help = EXIT_CODES)]
    Eval(EvalArgs),
    /// Writes a synthetic skeleton sequence for a random subject.
    #[command(after_help = EXIT_CODES)]
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Skeleton sequence JSON (one subject or an array of subjects).
    #[arg(long)]
    pub skeletons: PathBuf,
    /// Output FitResult JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Subject to fit from a multi-subject file; the first otherwise.
    #[arg(long)]
    pub subject: Option<String>,
    /// Shape prior weight.
    #[arg(long, default_value_t = 1e-3)]
    pub alpha: f64,
    /// Pose prior weight.
    #[arg(long, default_value_t = 1e-3)]
    pub gamma: f64,
    /// Frames sampled for shape fitting.
    #[arg(long, default_value_t = 8)]
    pub k_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// FitResult JSON (its shape is used) or a bare `{"beta": [...]}`.
    #[arg(long)]
    pub avatar: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub views: usize,
    /// Probability that the labeler replaces a human label by another one.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Output label texture PGM; a JSON sidecar is written next to it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Scenario JSON; relative paths inside resolve against its directory.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the number of dome cameras.
    #[arg(long)]
    pub cameras: Option<usize>,
    /// Also writes composite.ppm into every bundle.
    #[arg(long)]
    pub composite: bool,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the frame cap.
    #[arg(long)]
    pub frames: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    /// Bundle directory holding rgb.ppm, rgb_background.ppm and meta.json.
    #[arg(long)]
    pub bundle: PathBuf,
    /// Background plate (PPM or PNG); a procedural plate otherwise.
    #[arg(long)]
    pub plate: Option<PathBuf>,
    /// Output PPM.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed of the procedural plate.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predictions: one directory per frame with u.pgm, v.pgm, instance.pgm
    /// and depth16.pgm, named like the ground-truth bundles.
    #[arg(long)]
    pub pred_dir: PathBuf,
    /// Ground-truth dataset or bundle root.
    #[arg(long)]
    pub gt_dir: PathBuf,
    /// Comma-separated PCK thresholds in pixels.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19,20")]
    pub thresholds: Vec<f64>,
    /// Maximum mean joint distance (px) for a skeleton match.
    #[arg(long, default_value_t = 30.0)]
    pub match_threshold: f64,
    /// 2D reference skeletons: projected meta.json joints, or joints
    /// extracted from the ground-truth UV channels the same way as from the
    /// predictions.
    #[arg(long, value_enum, default_value_t = Reference::Joints)]
    pub reference: Reference,
    /// Directory for report.json and report.csv; the JSON goes to stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    Joints,
    Extracted,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output skeleton sequence JSON.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "subject")]
    pub subject_id: String,
    #[arg(long, default_value_t = 60)]
    pub frames: usize,
    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,
    /// Gaussian joint noise (m).
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Bound of the random shape coefficients.
    #[arg(long, default_value_t = 1.5)]
    pub shape_bound: f64,
    /// Half-range of the starting floor position (m).
    #[arg(long, default_value_t = 0.8)]
    pub spread: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Fit(a) => commands::fit(a, cli.timings),
        Command::Scan(a) => commands::scan(a, cli.timings),
        Command::Generate(a) => commands::generate(a, cli.timings),
        Command::Compose(a) => commands::compose(a, cli.timings),
        Command::Eval(a) => commands::eval(a, cli.timings),
        Command::Synth(a) => commands::synth(a, cli.timings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
