//! `rklt`: derive rounded KLT approximations, tabulate their coding measures,
//! verify the fast algorithms and run block-compression experiments.

mod commands;
mod parse;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "rklt", version, about = "Rounded KLT approximations for first-order Markov signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep rho and list every distinct rounded KLT matrix.
    Derive(DeriveArgs),
    /// Coding gain, efficiency, error energy and MSE as CSV.
    Metrics(MetricsArgs),
    /// Check the fast factorizations against the catalog matrices.
    Fastcheck(FastcheckArgs),
    /// Compress one grayscale image by zonal coefficient retention.
    Compress(CompressArgs),
    /// Average quality over a corpus for several transforms and r values.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct DeriveArgs {
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.001)]
    rho_step: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// Comma-separated transforms (T1..T4, K, K<rho>, DCT).
    #[arg(long, value_delimiter = ',')]
    transform: Vec<String>,
    /// Comma-separated correlation coefficients.
    #[arg(long, value_delimiter = ',')]
    rho: Vec<f64>,
    /// Rows used as synthesis vectors in the coding gain.
    #[arg(long, value_enum, default_value_t = Synthesis::Transpose)]
    synthesis: Synthesis,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Synthesis {
    Inverse,
    Transpose,
}

#[derive(Args, Debug)]
struct FastcheckArgs {
    /// JSONL catalog (as written by `derive --format jsonl`) to check
    /// instead of the built-in matrices.
    #[arg(long)]
    catalog: Option<std::path::PathBuf>,
    /// Print every factor matrix as CSV.
    #[arg(long)]
    dump_factors: bool,
    /// Random integer vectors per transform in the dense cross-check.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct CodecArgs {
    #[arg(long, value_enum, default_value_t = Window::Gaussian)]
    mssim_window: Window,
    #[arg(long, value_enum, default_value_t = Form::Separable)]
    form: Form,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Window {
    Gaussian,
    Uniform8,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Form {
    Separable,
    Similarity,
}

#[derive(Args, Debug)]
struct CompressArgs {
    /// PGM or PNG grayscale image.
    #[arg(long)]
    input: std::path::PathBuf,
    #[arg(long)]
    transform: String,
    /// Retained coefficients per 8x8 block, 1..=64.
    #[arg(long)]
    r: usize,
    /// Reconstructed image (binary PGM).
    #[arg(long)]
    output: Option<std::path::PathBuf>,
    /// Also write the report CSV here.
    #[arg(long)]
    report: Option<std::path::PathBuf>,
    #[command(flatten)]
    codec: CodecArgs,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["corpus", "synthetic"]))]
struct SweepArgs {
    /// Directory of PGM/PNG images.
    #[arg(long)]
    corpus: Option<std::path::PathBuf>,
    /// Use the built-in five-image synthetic corpus.
    #[arg(long)]
    synthetic: bool,
    /// Side length of synthetic images.
    #[arg(long, default_value_t = 256)]
    size: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Range `a..b` (inclusive) or comma list.
    #[arg(long, default_value = "1..45")]
    r: String,
    #[arg(long, value_delimiter = ',', default_value = "T1,T2,T3,T4,K0.3,K0.4,K0.7,K0.8,DCT")]
    transforms: Vec<String>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    output: Option<std::path::PathBuf>,
    #[command(flatten)]
    codec: CodecArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = commands::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    let result = match cli.command {
        Command::Derive(a) => commands::derive(&a),
        Command::Metrics(a) => commands::metrics(&a),
        Command::Fastcheck(a) => commands::fastcheck(&a),
        Command::Compress(a) => commands::compress(&a),
        Command::Sweep(a) => commands::sweep(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
