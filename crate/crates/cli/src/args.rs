//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gapfuse::synth::{EnsembleSpec, SceneParams};
use gapfuse::verify::{KsMode, DEFAULT_ALPHA, DEFAULT_BIN_WIDTH};
use gapfuse::{FillPolicy, FusionConfig};

#[derive(Debug, Parser)]
#[command(name = "gapfuse", version, about = "Merge gappy rainfall grids and score the result")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuse two grids, or every same-named pair of grids in two directories.
    Fuse(FuseArgs),
    /// Score products against a truth grid (or directory of grids).
    Eval(EvalArgs),
    /// Generate synthetic truth/a/b grid triplets.
    Synth(SynthArgs),
    /// Run the synthetic comparison of the fused product and both baselines.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Pyramid texture constrained by the interpolated shape.
    Fused,
    /// Interpolation only.
    Interp,
    /// Pyramid texture only.
    Pyramid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fill {
    Zero,
    Cross,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KsModeArg {
    Pooled,
    PerImage,
}

impl From<KsModeArg> for KsMode {
    fn from(m: KsModeArg) -> Self {
        match m {
            KsModeArg::Pooled => KsMode::Pooled,
            KsModeArg::PerImage => KsMode::PerImage,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FusionArgs {
    /// Steerable pyramid levels.
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    /// Orientation bands per level.
    #[arg(long, default_value_t = 16)]
    pub orientations: usize,
    /// Laplacian depth inside each subband.
    #[arg(long, default_value_t = 2)]
    pub inner_depth: usize,
    /// Rain threshold in mm/hr.
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    /// How gaps are filled before the transform.
    #[arg(long, value_enum, default_value_t = Fill::Zero)]
    pub fill: Fill,
}

impl FusionArgs {
    pub fn config(&self) -> FusionConfig {
        FusionConfig {
            levels: self.levels,
            orientations: self.orientations,
            inner_depth: self.inner_depth,
            missing_fill: match self.fill {
                Fill::Zero => FillPolicy::Zero,
                Fill::Cross => FillPolicy::Cross,
            },
            rain_threshold: self.threshold,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FuseArgs {
    pub input_a: PathBuf,
    pub input_b: PathBuf,
    /// Output grid, or output directory when the inputs are directories.
    #[arg(short, long)]
    #[serde(skip)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Fused)]
    pub method: Method,
    #[command(flatten)]
    pub fusion: FusionArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    /// Truth grid, or directory of truth grids.
    pub truth: PathBuf,
    /// Product grids (or directories holding grids named like the truth files).
    #[arg(required = true)]
    pub preds: Vec<PathBuf>,
    /// Report directory.
    #[arg(short, long)]
    #[serde(skip)]
    pub output: PathBuf,
    /// Product names for the reports; defaults to the file or directory names.
    #[arg(long, value_delimiter = ',')]
    pub names: Vec<String>,
    /// Rain threshold in mm/hr.
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    /// KS significance level.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Intensity histogram bin width in mm/hr.
    #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
    pub bin_width: f64,
    #[arg(long, value_enum, default_value_t = KsModeArg::Pooled)]
    pub ks_mode: KsModeArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EnsembleArgs {
    /// Ensemble seed.
    #[arg(long, default_value_t = 2011)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    /// Rain cells per scene.
    #[arg(long, default_value_t = 8)]
    pub cells: usize,
    /// Cell radius in pixels.
    #[arg(long, default_value_t = 4.0)]
    pub cell_scale: f64,
    /// Median cell peak in mm/hr.
    #[arg(long, default_value_t = 3.0)]
    pub intensity: f64,
    /// Target fraction of wet pixels.
    #[arg(long, default_value_t = 0.3)]
    pub wet_fraction: f64,
    #[arg(long, default_value_t = 0.3)]
    pub coverage_min: f64,
    #[arg(long, default_value_t = 0.7)]
    pub coverage_max: f64,
    /// Standard deviation of the multiplicative log-noise.
    #[arg(long, default_value_t = 0.3)]
    pub noise_sigma: f64,
}

impl EnsembleArgs {
    pub fn spec(&self, pairs: usize) -> EnsembleSpec {
        EnsembleSpec {
            seed: self.seed,
            pairs,
            scene: SceneParams {
                seed: 0,
                width: self.width,
                height: self.height,
                cell_count: self.cells,
                cell_scale: self.cell_scale,
                intensity_scale: self.intensity,
                wet_fraction_target: self.wet_fraction,
            },
            coverage_min: self.coverage_min,
            coverage_max: self.coverage_max,
            noise_sigma: self.noise_sigma,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(short, long)]
    #[serde(skip)]
    pub output: PathBuf,
    /// Number of pairs to attempt.
    #[arg(long, default_value_t = 1)]
    pub pairs: usize,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReproduceArgs {
    /// Report directory.
    #[arg(short, long)]
    #[serde(skip)]
    pub output: PathBuf,
    /// Number of pairs to attempt.
    #[arg(long, default_value_t = 200)]
    pub pairs: usize,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    pub fusion: FusionArgs,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
    pub bin_width: f64,
}
