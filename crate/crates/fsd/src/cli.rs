//! Command-line surface. Numeric bounds are enforced by the extraction
//! config and the command implementations, not by clap.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fsd_core::landmarks::LandmarkScheme;
use fsd_core::pipeline::{ContourSource, ExtractionConfig, SpectrumMode};

#[derive(Parser)]
#[command(
    name = "fsd",
    version,
    about = "Fused shape descriptors for facial expression recognition",
    disable_help_subcommand = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Extract fused shape features from a landmark manifest
    Extract(ExtractArgs),
    /// Train a one-against-all SVM from features or a manifest
    Train(TrainArgs),
    /// Classify samples with a trained model
    Predict(PredictArgs),
    /// Grid-searched k-fold cross-validation with a report bundle
    Evaluate(EvaluateArgs),
    /// Generate a synthetic landmark dataset
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Ibug68,
    Tracker49,
}

impl From<SchemeArg> for LandmarkScheme {
    fn from(v: SchemeArg) -> Self {
        match v {
            SchemeArg::Ibug68 => LandmarkScheme::Ibug68,
            SchemeArg::Tracker49 => LandmarkScheme::Tracker49,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ContourArg {
    FittedEllipse,
    LandmarkPolygon,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SpectrumArg {
    Vector,
    Scalar,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FoldModeArg {
    Stratified,
    SubjectIndependent,
}

/// Extraction knobs, shared by every command that reads a manifest.
#[derive(Args)]
pub struct ExtractOpts {
    /// Landmark scheme for rows without a per-sample override
    #[arg(long, value_enum, default_value = "ibug68")]
    pub scheme: SchemeArg,
    /// Region map file (defaults to the built-in map for the scheme)
    #[arg(long, value_name = "FILE")]
    pub region_map: Option<PathBuf>,
    /// Contour fed to the elliptic descriptor
    #[arg(long, value_enum, default_value = "fitted-ellipse")]
    pub contour_source: ContourArg,
    /// Points sampled on a fitted ellipse
    #[arg(long, default_value_t = 64)]
    pub ellipse_samples: usize,
    /// Contour harmonic count
    #[arg(long, default_value_t = 10)]
    pub harmonics: usize,
    /// Per-harmonic power vector, or the single power sum
    #[arg(long, value_enum, default_value = "vector")]
    pub spectrum_mode: SpectrumArg,
    /// Radial frequency count of the region descriptor
    #[arg(long, default_value_t = 4)]
    pub radial_freqs: usize,
    /// Angular frequency count of the region descriptor
    #[arg(long, default_value_t = 9)]
    pub angular_freqs: usize,
    /// Raster side length for region shapes
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    /// Blank border kept around rasterized shapes
    #[arg(long, default_value_t = 2)]
    pub margin: usize,
}

impl ExtractOpts {
    pub fn config(&self) -> ExtractionConfig {
        ExtractionConfig {
            contour_source: match self.contour_source {
                ContourArg::FittedEllipse => ContourSource::FittedEllipse,
                ContourArg::LandmarkPolygon => ContourSource::LandmarkPolygon,
            },
            ellipse_samples: self.ellipse_samples,
            harmonics: self.harmonics,
            spectrum_mode: match self.spectrum_mode {
                SpectrumArg::Vector => SpectrumMode::Vector,
                SpectrumArg::Scalar => SpectrumMode::Scalar,
            },
            radial_freqs: self.radial_freqs,
            angular_freqs: self.angular_freqs,
            resolution: self.resolution,
            margin: self.margin,
        }
    }
}

#[derive(Args)]
pub struct ExtractArgs {
    /// Dataset manifest CSV
    #[arg(long, value_name = "FILE")]
    pub manifest: PathBuf,
    /// Output feature CSV
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Abort on the first failing sample instead of skipping it
    #[arg(long)]
    pub strict: bool,
    /// Write every region mask as a PGM file under this directory
    #[arg(long, value_name = "DIR")]
    pub dump_masks: Option<PathBuf>,
    #[command(flatten)]
    pub opts: ExtractOpts,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Feature CSV produced by extract
    #[arg(long, value_name = "FILE", conflicts_with = "manifest", required_unless_present = "manifest")]
    pub features: Option<PathBuf>,
    /// Landmark manifest; extraction runs first and is echoed in the model
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    /// Output model JSON
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Soft-margin penalty
    #[arg(long, default_value_t = 8.0)]
    pub c: f64,
    /// Kernel width, or `auto` for 1/dim
    #[arg(long, default_value = "auto")]
    pub gamma: String,
    /// Solver convergence tolerance
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Solver iteration cap
    #[arg(long, default_value_t = 100_000)]
    pub max_passes: usize,
    #[command(flatten)]
    pub opts: ExtractOpts,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Trained model JSON
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Feature CSV produced by extract
    #[arg(long, value_name = "FILE", conflicts_with = "manifest", required_unless_present = "manifest")]
    pub features: Option<PathBuf>,
    /// Landmark manifest; uses the extraction settings stored in the model
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    /// Output prediction CSV
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Feature CSV produced by extract
    #[arg(long, value_name = "FILE", conflicts_with = "manifest", required_unless_present = "manifest")]
    pub features: Option<PathBuf>,
    /// Landmark manifest (runs extraction first)
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    /// Report bundle directory
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Fold count
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Fold assignment rule
    #[arg(long, value_enum, default_value = "stratified")]
    pub fold_mode: FoldModeArg,
    /// Shuffle seed, echoed in every output
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Comma-separated C grid (defaults to the built-in 7-value grid)
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub grid_c: Option<Vec<f64>>,
    /// Comma-separated gamma grid (defaults to the built-in 7-value grid)
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub grid_gamma: Option<Vec<f64>>,
    /// Solver convergence tolerance
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Solver iteration cap
    #[arg(long, default_value_t = 100_000)]
    pub max_passes: usize,
    #[command(flatten)]
    pub opts: ExtractOpts,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Dataset directory to create
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Number of expression classes, in canonical label order
    #[arg(long, default_value_t = 7)]
    pub classes: usize,
    /// Samples per class
    #[arg(long, default_value_t = 30)]
    pub per_class: usize,
    /// Landmark jitter as a fraction of the deformation scale
    #[arg(long, default_value_t = 0.5)]
    pub noise: f64,
    /// Generator seed, echoed in synth.json
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}
