//! `lightsb-ou` — train Schrödinger-bridge couplings with a Gaussian-mixture
//! potential over an Ornstein-Uhlenbeck reference, sample them, and score
//! the results.

mod commands;
mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "lightsb-ou", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a 25-Gaussian benchmark target plus a standard-normal source.
    GenData(GenDataArgs),
    /// Train a potential on source/target CSV samples.
    Train(TrainArgs),
    /// Push source points through a trained coupling.
    Sample(SampleArgs),
    /// Sample full trajectories of the learned process.
    Trajectory(TrajectoryArgs),
    /// Score two sample clouds with all four metrics.
    Eval(EvalArgs),
    /// Grid-sweep the reference-process parameters (b, m).
    Sweep(SweepArgs),
    /// Full benchmark: generate, sweep, train baseline and best cell,
    /// evaluate with repeats, and emit the comparison report.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
pub struct GenDataArgs {
    /// Mixture layout: standard, irregular, or anisotropic.
    #[arg(long, default_value = "standard")]
    variant: String,
    /// Number of samples for both the target and source CSVs.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct TrainArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Checkpoint output path (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Loss-trace CSV path; defaults to the checkpoint path with a
    /// `.loss.csv` suffix.
    #[arg(long)]
    loss_csv: Option<PathBuf>,
    /// Resume from an existing checkpoint instead of a fresh initialization.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Reference level scale: m = m_scale · (1, …, 1).
    #[arg(long = "m")]
    m_scale: Option<f64>,
    #[arg(long = "t")]
    t_horizon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// adam or sgd.
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    checkpoint_every: Option<usize>,
}

#[derive(Args)]
pub struct SampleArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    source: PathBuf,
    /// Draw this many source rows (with replacement); default uses every row.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
pub struct TrajectoryArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    source: PathBuf,
    /// Number of time knots per trajectory (including both endpoints).
    #[arg(long, default_value_t = 16)]
    knots: usize,
    /// Draw this many source rows (with replacement); default uses every row.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
pub struct EvalArgs {
    /// First sample cloud (CSV with header).
    #[arg(long)]
    x: PathBuf,
    /// Second sample cloud (CSV with header).
    #[arg(long)]
    y: PathBuf,
    /// Ground-truth modes JSON for mode coverage.
    #[arg(long)]
    modes: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    n_proj: usize,
    /// Gaussian kernel width; median heuristic when omitted.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 0.9)]
    confidence: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Synthetic benchmark variant; alternatively pass --source/--target.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    source: Option<PathBuf>,
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    modes: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated drift rates, e.g. "-0.1,0,0.1".
    #[arg(long, default_value = "-0.1,0,0.1", allow_hyphen_values = true)]
    b_grid: String,
    /// Comma-separated m scales, e.g. "-0.25,0,0.25".
    #[arg(long, default_value = "-0.25,0,0.25", allow_hyphen_values = true)]
    m_grid: String,
    #[arg(long, default_value = "sliced_w1")]
    metric: String,
    #[arg(long, default_value_t = 10_000)]
    eval_n: usize,
    #[arg(long, default_value_t = 10_000)]
    n_steps: usize,
    #[arg(long, default_value_t = 30)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct BenchmarkArgs {
    /// standard, irregular, anisotropic, or all.
    #[arg(long, default_value = "all")]
    variant: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Samples per evaluation repeat.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 10_000)]
    n_steps: usize,
    #[arg(long, default_value_t = 30)]
    k: usize,
    #[arg(long, default_value_t = 128)]
    batch_size: usize,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 2e-3)]
    lr: f64,
    #[arg(long, default_value_t = 100)]
    n_proj: usize,
    #[arg(long, default_value = "-0.1,0,0.1", allow_hyphen_values = true)]
    b_grid: String,
    #[arg(long, default_value = "-0.25,0,0.25", allow_hyphen_values = true)]
    m_grid: String,
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::GenData(args) => commands::gen_data(args),
        Command::Train(args) => commands::train(args),
        Command::Sample(args) => commands::sample(args),
        Command::Trajectory(args) => commands::trajectory(args),
        Command::Eval(args) => commands::eval(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Benchmark(args) => commands::benchmark(args),
    }
}
