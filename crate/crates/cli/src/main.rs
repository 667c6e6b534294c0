//! `mixgp` command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod evaluator;

#[derive(Parser)]
#[command(name = "mixgp", version, about = "Mixed-categorical Gaussian-process surrogates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a Latin hypercube design and write it as CSV.
    Sample(SampleArgs),
    /// Fit a model on a design with responses.
    Fit(FitArgs),
    /// Predict mean and variance at the points of a CSV file.
    Predict(PredictArgs),
    /// Score a saved model on a built-in problem's validation grid.
    Evaluate(EvaluateArgs),
    /// Run efficient global optimization.
    Optimize(OptimizeArgs),
    /// Run the model or optimization benchmarks of a built-in problem.
    Benchmark(BenchmarkArgs),
    /// Write the fitted level correlation matrix of a categorical variable.
    ExportCorr(ExportCorrArgs),
}

#[derive(Args)]
struct SpaceSource {
    /// Design-space JSON file.
    #[arg(long, conflicts_with = "problem")]
    space: Option<PathBuf>,
    /// Built-in problem: cosine, toy or cantilever.
    #[arg(long)]
    problem: Option<String>,
}

#[derive(Args, Clone)]
struct KernelArgs {
    /// gd, cr, cr-pls, ehh, hh, ehh-pls or hh-pls.
    #[arg(long, default_value = "hh")]
    kernel: String,
    /// Reduced levels (ehh-pls, hh-pls) or PLS components (cr-pls).
    #[arg(long)]
    pls_levels: Option<usize>,
    /// PLS components for the continuous and integer inputs.
    #[arg(long)]
    continuous_pls: Option<usize>,
    #[arg(long, value_enum, default_value_t = ContinuousArg::SquaredExponential)]
    continuous_kernel: ContinuousArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ContinuousArg {
    SquaredExponential,
    AbsoluteExponential,
}

#[derive(Args, Clone)]
struct FitTuning {
    /// Likelihood multistart count.
    #[arg(long, default_value_t = 10)]
    starts: usize,
    /// Per-start evaluation cap for the likelihood search.
    #[arg(long)]
    max_evals: Option<usize>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    source: SpaceSource,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also evaluate the built-in problem and add a `y` column.
    #[arg(long)]
    evaluate: bool,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    source: SpaceSource,
    #[arg(long)]
    doe: PathBuf,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    tuning: FitTuning,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    problem: String,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    source: SpaceSource,
    /// Shell command evaluating one point: JSON object on standard input,
    /// `{"y": value}` on standard output.
    #[arg(long, requires = "space")]
    evaluator: Option<String>,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    tuning: FitTuning,
    #[arg(long, default_value_t = 5)]
    doe_size: usize,
    #[arg(long, default_value_t = 55)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trace CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchmarkMode {
    Model,
    Optim,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, value_enum, default_value_t = BenchmarkMode::Model)]
    mode: BenchmarkMode,
    /// Comma-separated kernels, e.g. `gd,cr,hh-pls:2,hh`.
    #[arg(long, value_delimiter = ',', default_value = "gd,cr,hh-pls:2,hh")]
    kernels: Vec<String>,
    /// Model mode: LHS design size.
    #[arg(long, default_value_t = 98)]
    doe_size: usize,
    /// Model mode: number of designs (seeds `seed..seed+seeds`).
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Optimization mode: initial design sizes.
    #[arg(long, value_delimiter = ',', default_value = "5,10")]
    doe_sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = 55)]
    budget: usize,
    #[arg(long, default_value_t = 25)]
    best_at: usize,
    #[command(flatten)]
    tuning: FitTuning,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving the CSV, JSON and correlation files.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ExportCorrArgs {
    #[arg(long)]
    model: PathBuf,
    /// Categorical variable name; the first categorical when omitted.
    #[arg(long)]
    variable: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sample(a) => commands::sample(a),
        Command::Fit(a) => commands::fit(a),
        Command::Predict(a) => commands::predict(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Optimize(a) => commands::optimize(a),
        Command::Benchmark(a) => commands::benchmark(a),
        Command::ExportCorr(a) => commands::export_corr(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
