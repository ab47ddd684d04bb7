//! Command-line front end.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "speechdiff", version, about = "Score-based diffusion speech enhancement toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compare forward Euler-Maruyama statistics against the closed-form kernel.
    KernelCheck(KernelCheckArgs),
    /// Write trajectory mean/variance curves for the forward or reverse process.
    Simulate(SimulateArgs),
    /// Enhance a degraded recording.
    Enhance(EnhanceArgs),
    /// Degrade a clean recording with a randomly sampled distortion chain.
    Distort(DistortArgs),
    /// Train the toy score network on the scalar Gaussian task.
    TrainToy(TrainToyArgs),
    /// Compute LSD, SSIM, SNR and SI-SNR of an estimate against a reference.
    Metrics(MetricsArgs),
    /// Apply a Butterworth low-pass filter.
    SrFilter(SrFilterArgs),
}

#[derive(Args, Debug, Clone)]
struct SdeArgs {
    /// Optional `key = value` run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["bbed", "ouve"])]
    sde: Option<String>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Process horizon `T`.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct KernelCheckArgs {
    #[command(flatten)]
    sde: SdeArgs,
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, default_value_t = 0.5)]
    y: f64,
    /// Relative tolerance on mean and standard deviation.
    #[arg(long, default_value_t = 0.02)]
    tolerance: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Forward,
    Reverse,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    #[command(flatten)]
    sde: SdeArgs,
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    /// Forward steps, or reverse steps `N` over `[0, T]`.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, default_value_t = 0.5)]
    y: f64,
    /// Reverse start time; defaults to `T`.
    #[arg(long)]
    trs: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct EnhanceArgs {
    #[command(flatten)]
    sde: SdeArgs,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Clean reference, required by the oracle predictor and score.
    #[arg(long)]
    clean: Option<PathBuf>,
    /// identity, oracle or specsub.
    #[arg(long)]
    pred: Option<String>,
    /// oracle, analytic, zero or model:<path>.
    #[arg(long)]
    score: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    trs: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_parser = ["pcm16", "float32"], default_value = "float32")]
    format: String,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct DistortArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    noise_dir: Option<PathBuf>,
    #[arg(long)]
    rir_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Provenance log; defaults to `<out>.log`.
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long, value_parser = ["pcm16", "float32"], default_value = "float32")]
    format: String,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct TrainToyArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3e-3)]
    lr: f64,
    #[arg(long, default_value_t = 4096)]
    pairs: usize,
    #[arg(long, default_value_t = 64)]
    hidden: usize,
    /// Optional loss history CSV.
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct MetricsArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    est: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SrFilterArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 4000.0)]
    cutoff: f64,
    #[arg(long, default_value_t = 12)]
    order: usize,
    #[arg(long, value_parser = ["pcm16", "float32"], default_value = "float32")]
    format: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
