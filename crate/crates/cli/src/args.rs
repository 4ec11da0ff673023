use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "spatiocv", version, about = "Spatial and spatiotemporal cross-validation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a task into resampling folds and write the plan as JSON.
    Partition(PartitionArgs),
    /// Evaluate a learner on a plan.
    Resample(ResampleArgs),
    /// Tune a learner with an inner resampling loop inside each outer fold.
    Nested(NestedArgs),
    /// Generate a synthetic autocorrelated classification task.
    Synth(SynthArgs),
    /// Check a plan against a task.
    Validate(ValidateArgs),
    /// Render folds of a plan as SVG.
    Plot(PlotArgs),
    /// Estimate the autocorrelation range of a variable.
    Range(RangeArgs),
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Master random seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Print a machine-readable JSON summary on stdout.
    #[arg(long)]
    pub json: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// How to read the task file.
#[derive(Debug, Args, Clone)]
pub struct TaskArgs {
    /// Task file, CSV or GeoJSON (by `.geojson`/`.json` extension).
    #[arg(long)]
    pub input: PathBuf,
    /// Response column.
    #[arg(long, default_value = "label")]
    pub response: String,
    /// `auto`, `categorical` or `numeric`.
    #[arg(long, default_value = "auto")]
    pub response_kind: String,
    #[arg(long)]
    pub positive: Option<String>,
    #[arg(long, default_value = "x")]
    pub x: String,
    #[arg(long, default_value = "y")]
    pub y: String,
    #[arg(long)]
    pub time: Option<String>,
    #[arg(long)]
    pub location: Option<String>,
    #[arg(long)]
    pub group: Option<String>,
    /// Comma-separated feature columns; defaults to all remaining numeric columns.
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    #[arg(long)]
    pub coords_as_features: bool,
}

/// Method parameters. Flags and `--param key=value` pairs are merged.
#[derive(Debug, Args, Clone, Default)]
pub struct MethodArgs {
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub grouped: bool,
    #[arg(long)]
    pub the_range: Option<f64>,
    #[arg(long)]
    pub sp_data_type: Option<String>,
    #[arg(long)]
    pub add_bg: Option<bool>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub buffer: Option<f64>,
    #[arg(long)]
    pub replace: bool,
    /// Tile grid as ROWSxCOLS.
    #[arg(long)]
    pub nsplit: Option<String>,
    /// Tile sides as DX,DY.
    #[arg(long)]
    pub dsplit: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub rotation: Option<f64>,
    #[arg(long)]
    pub min_n: Option<usize>,
    #[arg(long)]
    pub min_frac: Option<f64>,
    #[arg(long)]
    pub column: Option<String>,
    /// Square block side length.
    #[arg(long)]
    pub range: Option<f64>,
    /// Block grid as ROWSxCOLS.
    #[arg(long)]
    pub rows_cols: Option<String>,
    #[arg(long)]
    pub selection: Option<String>,
    /// Comma-separated features for environmental blocking.
    #[arg(long)]
    pub env_features: Option<String>,
    #[arg(long)]
    pub space_var: Option<String>,
    #[arg(long)]
    pub time_var: Option<String>,
    /// Extra method parameter as KEY=VALUE (repeatable).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    #[arg(long)]
    pub method: String,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[command(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    pub method_args: MethodArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Clone)]
pub struct LearnerArgs {
    /// `knn`, `logistic` or `featureless`.
    #[arg(long, default_value = "knn")]
    pub learner: String,
    #[arg(long, default_value_t = 1)]
    pub k_neighbors: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub lambda: f64,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.5)]
    pub learning_rate: f64,
    /// `auroc`, `misclassification` or `rmse`.
    #[arg(long, default_value = "auroc")]
    pub measure: String,
}

#[derive(Debug, Args)]
pub struct ResampleArgs {
    #[arg(long)]
    pub plan: PathBuf,
    #[command(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    pub learner: LearnerArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct NestedArgs {
    /// Outer plan.
    #[arg(long)]
    pub plan: PathBuf,
    /// Comma-separated k_neighbors values to tune over (knn only).
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<usize>,
    #[arg(long)]
    pub inner_method: String,
    /// Inner method parameter as KEY=VALUE (repeatable).
    #[arg(long = "inner-param", value_name = "KEY=VALUE")]
    pub inner_params: Vec<String>,
    #[command(flatten)]
    pub task: TaskArgs,
    #[arg(long, default_value = "auroc")]
    pub measure: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.0)]
    pub nugget: f64,
    #[arg(long, default_value_t = 2)]
    pub noise_features: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub plan: PathBuf,
    #[command(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub plan: PathBuf,
    #[command(flatten)]
    pub task: TaskArgs,
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    /// Comma-separated fold ids; all folds when absent.
    #[arg(long, value_delimiter = ',')]
    pub fold_ids: Vec<usize>,
    #[arg(long, default_value_t = 3.0)]
    pub point_size: f64,
    #[arg(long)]
    pub show_blocks: bool,
    #[arg(long)]
    pub facet_by_time: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    /// Numeric feature or response to analyse.
    #[arg(long)]
    pub variable: String,
    #[arg(long, default_value_t = 12)]
    pub n_lags: usize,
    /// Largest pair distance considered; defaults to 60% of the longer bounding-box side.
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[command(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    pub common: Common,
}
