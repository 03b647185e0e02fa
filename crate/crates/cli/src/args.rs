use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "evosplit",
    version,
    about = "Split multi-label datasets into size-exact folds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print dataset imbalance statistics as JSON.
    Analyze(AnalyzeArgs),
    /// Split a dataset and write the assignment and its report.
    Split(SplitArgs),
    /// Score an existing assignment CSV.
    Evaluate(EvaluateArgs),
    /// Run several methods on the same dataset and tabulate their scores.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Jsonl,
    SparseText,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Random,
    Is,
    Sois,
    EaLd,
    EaLpd,
    Moea,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::Is => "is",
            Method::Sois => "sois",
            Method::EaLd => "ea-ld",
            Method::EaLpd => "ea-lpd",
            Method::Moea => "moea",
        }
    }

    pub fn is_evolutionary(self) -> bool {
        matches!(self, Method::EaLd | Method::EaLpd | Method::Moea)
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to jsonl for `.jsonl`/`.json` files and sparse-text otherwise.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Args)]
pub struct FoldArgs {
    /// Number of folds; equal proportions unless --proportions or --targets is given.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',', conflicts_with = "targets")]
    pub proportions: Option<Vec<f64>>,
    /// Exact example count per fold.
    #[arg(long, value_delimiter = ',')]
    pub targets: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Require every fold to contain every label present in at least k examples.
    #[arg(long)]
    pub constrained: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent evolutionary runs; the best is kept (default 5).
    #[arg(long)]
    pub runs: Option<usize>,
    /// Worker threads; never changes results.
    #[arg(long, env = "EVOSPLIT_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long = "out-report")]
    pub out_report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub folds: FoldArgs,
    #[arg(long, value_enum)]
    pub method: Method,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long = "out-assignment")]
    pub out_assignment: Option<PathBuf>,
    #[arg(long = "out-report")]
    pub out_report: Option<PathBuf>,
    /// Objective pairs of the final Pareto front (moea only).
    #[arg(long = "out-front")]
    pub out_front: Option<PathBuf>,
    /// Also compute the exhaustive optimum (tiny instances only).
    #[arg(long)]
    pub oracle: bool,
    /// Record wall-clock time in the report (makes reports non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub folds: FoldArgs,
    /// CSV with header `example_index,fold`.
    #[arg(long)]
    pub assignment: PathBuf,
    #[arg(long = "out-report")]
    pub out_report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub folds: FoldArgs,
    /// Comma-separated methods, in table order.
    #[arg(
        long = "method",
        alias = "methods",
        value_enum,
        value_delimiter = ',',
        required = true
    )]
    pub methods: Vec<Method>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long = "out-report")]
    pub out_report: Option<PathBuf>,
}
