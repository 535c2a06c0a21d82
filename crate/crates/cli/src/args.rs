use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use igam::gam::TrainConfig;

#[derive(Parser, Debug)]
#[command(name = "igam", version, about = "Boosted piecewise-linear additive models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a model and write it to a file.
    Train(TrainArgs),
    /// Predict every row of a CSV file.
    Predict(PredictArgs),
    /// K-fold cross-validation report.
    Eval(EvalArgs),
    /// Write shape tables and density histograms in raw units.
    ExportShapes(ExportArgs),
    /// Generate the synthetic load-forecasting dataset.
    GenSynthetic(SynthArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

/// Hyperparameter flags. Each one overrides the config file.
#[derive(Args, Debug, Default)]
pub struct ConfigFlags {
    /// `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Start from the load-forecasting settings instead of the defaults.
    #[arg(long)]
    pub load_forecasting: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub k_basis: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub step: Option<f64>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub grid_size: Option<usize>,
    #[arg(long)]
    pub pairwise: Option<bool>,
    #[arg(long)]
    pub standardize_target: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub warm_start: Option<bool>,
}

impl ConfigFlags {
    pub fn resolve(&self) -> Result<TrainConfig, crate::error::CliError> {
        let mut c = if self.load_forecasting {
            TrainConfig::load_forecasting()
        } else {
            TrainConfig::default()
        };
        if let Some(p) = &self.config {
            let text = std::fs::read_to_string(p).map_err(|_| crate::error::CliError::FileNotFound(p.clone()))?;
            c.apply_kv(&text)?;
        }
        macro_rules! over {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        over!(lambda, k_basis, step, rounds, alpha, grid_size, pairwise, standardize_target, seed, warm_start);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args, Debug)]
pub struct DataArgs {
    /// CSV file with a header row.
    pub data: PathBuf,
    /// Target column.
    #[arg(long)]
    pub target: String,
    /// Sample weight column.
    #[arg(long)]
    pub weight: Option<String>,
    /// Row id column (defaults to `row_id` or `timestamp` when present).
    #[arg(long)]
    pub id_column: Option<String>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub config: ConfigFlags,
    /// JSON array of constraints: `{"feature", "kind", "range": [lo, hi]}`.
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    /// Output model file.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Suppress the per-round loss trace.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// Model file.
    #[arg(long)]
    pub model: PathBuf,
    /// CSV with the model's feature columns.
    pub data: PathBuf,
    /// Output CSV (`row_id,prediction`); stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub config: ConfigFlags,
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Report file; defaults to `reports/<dataset>-<config hash>-seed<seed>.json`.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Only this feature.
    #[arg(long)]
    pub feature: Option<String>,
    #[arg(long, short)]
    pub out_dir: PathBuf,
    /// Center values on their training mean.
    #[arg(long)]
    pub centered: bool,
    /// Also write an SVG plot per feature.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 365)]
    pub days: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Name of the target column.
    #[arg(long, default_value = "load")]
    pub target: String,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    /// Overrides IGAM_BIND.
    #[arg(long)]
    pub bind: Option<String>,
    /// Overrides IGAM_DATA_DIR.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Overrides IGAM_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
}
