use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dab_core::{ClampMode, Scope};

/// Multi-image hallucination benchmark: build datasets, simulate answers
/// with and without attention balancing, score them and run sweeps.
///
/// Every flag can also be set through an environment variable named
/// MIHBENCH_<FLAG>, e.g. MIHBENCH_SEED or MIHBENCH_ALPHA.
#[derive(Debug, Parser)]
#[command(name = "mihbench", version)]
pub struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, env = "MIHBENCH_SEED")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write synthetic annotations, view groups and a similarity matrix.
    Synth(SynthArgs),
    /// Build the existence, count and identity datasets.
    GenData(GenDataArgs),
    /// Answer existence questions with the toy decoder.
    RunSim(RunSimArgs),
    /// Score predictions against datasets.
    Eval(EvalArgs),
    /// Run an image-count, negative-position or negative-ratio sweep.
    Sweep(SweepArgs),
    /// Combine reports or analyze hallucination correlation.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, env = "MIHBENCH_OUT")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 600)]
    pub images: usize,
    #[arg(long, default_value_t = 8)]
    pub categories: usize,
    #[arg(long, default_value_t = 5)]
    pub objects_per_category: usize,
    #[arg(long, default_value_t = 8)]
    pub views: usize,
}

/// Inputs shared by commands that build datasets. Without explicit files a
/// synthetic pool derived from the seed is used.
#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Annotation records, one JSON object per line.
    #[arg(long, env = "MIHBENCH_ANNOTATIONS")]
    pub annotations: Option<PathBuf>,
    /// Multi-view groups, one JSON object per line.
    #[arg(long, env = "MIHBENCH_GROUPS")]
    pub groups: Option<PathBuf>,
    /// Square similarity matrix over all view ids (CSV).
    #[arg(long, env = "MIHBENCH_SIMILARITY")]
    pub similarity: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, env = "MIHBENCH_OUT")]
    pub out: PathBuf,
    #[arg(long, env = "MIHBENCH_EXISTENCE_PER_SUBTYPE", default_value_t = 800)]
    pub existence_per_subtype: usize,
    #[arg(long, env = "MIHBENCH_COUNT", default_value_t = 800)]
    pub count: usize,
    #[arg(long, env = "MIHBENCH_IDENTITY", default_value_t = 800)]
    pub identity: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveArg {
    Step,
    Linear,
    Certain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayersArg {
    Final,
    All,
}

/// Simulator settings. Flags override the config file, which overrides the
/// built-in defaults.
#[derive(Debug, Args, Default)]
pub struct SimArgs {
    /// JSON file with optional `decoder`, `readout` and `rebalance` objects.
    #[arg(long, env = "MIHBENCH_CONFIG")]
    pub config: Option<PathBuf>,
    /// Also run with attention balancing.
    #[arg(long, env = "MIHBENCH_DAB")]
    pub dab: bool,
    #[arg(long, env = "MIHBENCH_ALPHA")]
    pub alpha: Option<f64>,
    #[arg(long, env = "MIHBENCH_TAU")]
    pub tau: Option<f64>,
    #[arg(long, env = "MIHBENCH_CLAMP_MODE")]
    pub clamp_mode: Option<ClampMode>,
    #[arg(long, env = "MIHBENCH_SCOPE")]
    pub scope: Option<Scope>,
    /// Logit bias added to the skew target's keys.
    #[arg(long, env = "MIHBENCH_SKEW")]
    pub skew: Option<f64>,
    /// 0-based index of the image receiving the skew.
    #[arg(long, env = "MIHBENCH_SKEW_TARGET")]
    pub skew_target: Option<usize>,
    #[arg(long, env = "MIHBENCH_CURVE")]
    pub curve: Option<CurveArg>,
    #[arg(long, env = "MIHBENCH_READOUT_LAYERS")]
    pub readout_layers: Option<LayersArg>,
    #[arg(long, env = "MIHBENCH_LAYERS")]
    pub layers: Option<usize>,
    #[arg(long, env = "MIHBENCH_HEADS")]
    pub heads: Option<usize>,
    #[arg(long, env = "MIHBENCH_MODEL_DIM")]
    pub model_dim: Option<usize>,
    #[arg(long, env = "MIHBENCH_TOKENS_PER_IMAGE")]
    pub tokens_per_image: Option<usize>,
    #[arg(long, env = "MIHBENCH_TEXT_TOKENS")]
    pub text_tokens: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunSimArgs {
    /// Existence dataset (JSONL).
    #[arg(long, env = "MIHBENCH_DATASET")]
    pub dataset: PathBuf,
    #[arg(long, env = "MIHBENCH_OUT")]
    pub out: PathBuf,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Dump attention tensors of the first N instances.
    #[arg(long, env = "MIHBENCH_DUMP_ATTENTION", default_value_t = 0)]
    pub dump_attention: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// One or more dataset files; every instance needs a prediction.
    #[arg(long = "dataset", required = true, num_args = 1..)]
    pub datasets: Vec<PathBuf>,
    #[arg(long, env = "MIHBENCH_PREDICTIONS")]
    pub predictions: PathBuf,
    #[arg(long, env = "MIHBENCH_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    ImageCount,
    NegativePosition,
    NegativeRatio,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub kind: SweepKind,
    /// Sweep points: sequence lengths, distractor positions or the number
    /// of target views per negative. Defaults: 2..6, 1..4, 1..4.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub points: Option<Vec<usize>>,
    #[arg(long, env = "MIHBENCH_PER_POINT", default_value_t = 200)]
    pub per_point: usize,
    /// Sequence length for the negative-position sweep.
    #[arg(long, default_value_t = 4)]
    pub seq_len: usize,
    /// Directory holding `<point>.jsonl` predictions for sweeps the
    /// simulator cannot answer.
    #[arg(long)]
    pub predictions_dir: Option<PathBuf>,
    #[arg(long, env = "MIHBENCH_OUT")]
    pub out: PathBuf,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(subcommand)]
    pub command: ReportCommand,
}

#[derive(Debug, Subcommand)]
pub enum ReportCommand {
    /// Side-by-side accuracy and F1 of several eval reports.
    Compare {
        /// `label=path/to/report.csv`, repeated.
        #[arg(long = "input", required = true, num_args = 1..)]
        inputs: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Joint distribution of single-image and multi-image hallucination.
    Correlation {
        /// Per-image flags from single-image questions (JSONL).
        #[arg(long)]
        single: PathBuf,
        /// Per-image flags from the multi-image question (JSONL).
        #[arg(long)]
        joint: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}
