use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use simplex_clf::classifiers::PriorMode;
use simplex_clf::dataio::Regime;
use simplex_clf::evaluation::MethodFamily;

#[derive(Parser, Debug)]
#[command(
    name = "simplex-clf",
    version,
    about = "Classify compositional data with alpha-transformed RDA and k-NN"
)]
pub struct Cli {
    /// Worker threads for cross-validation; all cores when unset.
    #[arg(long, global = true, env = "SIMPLEX_CLF_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Alpha-transform every row of a dataset, or invert transformed rows.
    Transform(TransformArgs),
    /// Distances between all pairs of rows.
    Distance(DistanceArgs),
    /// Zero pattern and group sizes of a dataset.
    Summarize(SummarizeArgs),
    /// Fit one classifier and save it as JSON.
    Fit(FitArgs),
    /// Classify rows with a saved model.
    Predict(PredictArgs),
    /// Cross-validate one classifier.
    Cv(CvArgs),
    /// Cross-validated search over alpha, lambda, gamma and k.
    Grid(GridArgs),
    /// Generate a synthetic labelled dataset.
    Synth(SynthArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// UCI glass identification layout: drops Id and RI, maps Type codes.
    Glass,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Tsv,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricArg {
    Alpha,
    Esov,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorArg {
    Proportional,
    Uniform,
}

impl From<PriorArg> for PriorMode {
    fn from(p: PriorArg) -> Self {
        match p {
            PriorArg::Proportional => PriorMode::Proportional,
            PriorArg::Uniform => PriorMode::Uniform,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeArg {
    /// Gaussian in log-ratio coordinates.
    Lra,
    /// Thin slabs in raw simplex coordinates.
    Eda,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Lra => Regime::LraFavored,
            RegimeArg::Eda => Regime::EdaFavored,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DataArgs {
    /// Delimited file with a header row, `-` for standard input. Tabs are
    /// detected from the header line.
    #[arg(long)]
    pub data: String,

    /// Column holding the group labels.
    #[arg(long, default_value = "group")]
    pub label_col: String,

    /// Comma-separated columns to ignore.
    #[arg(long, value_delimiter = ',')]
    pub drop_cols: Vec<String>,

    /// Known file layout. Replaces --label-col and --drop-cols.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OutArgs {
    /// Directory for output files. Without it the main output goes to
    /// standard output and secondary files are skipped.
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: Option<String>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MethodArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,

    /// RDA weight between pooled (0) and group (1) covariances.
    #[arg(long)]
    pub lambda: Option<f64>,

    /// RDA shrinkage towards a multiple of the identity.
    #[arg(long)]
    pub gamma: Option<f64>,

    /// Use k-NN with this many neighbours instead of RDA.
    #[arg(long)]
    pub k: Option<usize>,

    /// k-NN metric; implies k-NN.
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,

    #[arg(long, value_enum, default_value = "proportional")]
    pub prior: PriorArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CvArgsCommon {
    /// Test set size; about 14% of the data when unset.
    #[arg(long)]
    pub n_test: Option<usize>,

    /// Number of random train/test splits.
    #[arg(long, default_value_t = 200)]
    pub reps: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TransformArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,

    /// Read transformed coordinates and map them back to compositions.
    #[arg(long)]
    pub inverse: bool,

    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long, value_enum, default_value = "alpha")]
    pub metric: MetricArg,

    /// Required for the alpha metric.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,

    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SummarizeArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Without a format a text table is printed; csv and tsv re-export the
    /// dataset.
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub method: MethodArgs,

    /// Seed for k-NN tie breaking.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PredictArgs {
    /// Model written by `fit`.
    #[arg(long)]
    pub model: String,

    /// Rows to classify. Needs the model's component columns; a label
    /// column, if present, is used to report accuracy.
    #[command(flatten)]
    pub data: DataArgs,

    /// Seed for k-NN tie breaking; the model's seed when unset.
    #[arg(long)]
    pub seed: Option<u64>,

    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub method: MethodArgs,

    #[command(flatten)]
    pub cv: CvArgsCommon,

    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GridArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// `lo:hi:step`, a list or one value. Defaults to -1:1:0.05, or
    /// 0.05:1:0.05 when the data contain zeros.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_grid: Option<String>,

    #[arg(long)]
    pub lambda_grid: Option<String>,

    #[arg(long)]
    pub gamma_grid: Option<String>,

    /// `lo:hi[:step]` or a list; defaults to 1:10.
    #[arg(long)]
    pub k_grid: Option<String>,

    /// Comma-separated subset of rda, lda, qda, knn_alpha, knn_esov.
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<MethodFamily>,

    #[arg(long, value_enum, default_value = "proportional")]
    pub prior: PriorArg,

    #[command(flatten)]
    pub cv: CvArgsCommon,

    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub regime: RegimeArg,

    /// Number of parts.
    #[arg(long, default_value_t = 4)]
    pub dim: usize,

    #[arg(long, default_value_t = 2)]
    pub groups: usize,

    #[arg(long, default_value_t = 50)]
    pub group_size: usize,

    /// Distance between consecutive group means in standard deviations.
    #[arg(long, default_value_t = 10.0)]
    pub separation: f64,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[command(flatten)]
    pub out: OutArgs,
}
