//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "graphbank",
    version,
    about = "Perfect-reconstruction wavelet filterbanks on graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Design configuration (JSON with keys r, s, J, alpha, xi0, epsilon, model).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for every random stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; `report.json` is written here.
    #[arg(long, default_value = "graphbank-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct GraphInput {
    /// Edge list: `u v [w]` per line, 0-based ids.
    #[arg(long)]
    pub graph: PathBuf,
    /// Optional vertex coordinates: `x y` per line.
    #[arg(long)]
    pub coords: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated graph as an edge list (and coordinates).
    Generate(GenerateArgs),
    /// Design filters and write the frequency responses.
    Design(DesignArgs),
    /// Assemble a filterbank and check perfect reconstruction.
    Verify(VerifyArgs),
    /// Multi-level analysis of a signal.
    Decompose(DecomposeArgs),
    /// Hard-threshold denoising.
    Denoise(DenoiseArgs),
    /// sigma_min(I + KG) over a random graph ensemble per sampling strategy.
    Bench(BenchArgs),
}

#[derive(Debug, Args, Clone)]
pub struct FamilyArgs {
    /// ring, path, comet, sensor or bipartite.
    #[arg(long, default_value = "sensor")]
    pub family: String,
    /// Vertex count (ring, path, comet, sensor).
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Bipartite part sizes.
    #[arg(long, default_value_t = 20)]
    pub left: usize,
    #[arg(long, default_value_t = 80)]
    pub right: usize,
    /// Bipartite edge probability.
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub input: GraphInput,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: GraphInput,
    #[command(flatten)]
    pub common: Common,
    /// Number of random unit signals.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// alg1, natural or all-lowpass.
    #[arg(long, default_value = "alg1")]
    pub sampling: String,
    /// Strategy for vertices left free by alg1: polarity or random.
    #[arg(long, default_value = "polarity")]
    pub strategy: String,
    /// Use degree-conjugated (zero-DC) filters.
    #[arg(long)]
    pub zero_dc: bool,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub input: GraphInput,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: u64,
    /// Input signal, one value per line; a synthetic signal is used if absent.
    #[arg(long)]
    pub signal: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[command(flatten)]
    pub input: GraphInput,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: u64,
    /// Noise standard deviation; the threshold is 3 sigma.
    #[arg(long)]
    pub sigma: f64,
    /// Clean signal (default: a smooth low-frequency signal). Noise is added
    /// to it unless `--noisy` is given.
    #[arg(long)]
    pub signal: Option<PathBuf>,
    /// Already noisy signal to denoise.
    #[arg(long)]
    pub noisy: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub common: Common,
    /// Ensemble size.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub graphs: u64,
    /// Comma-separated strategies.
    #[arg(long, default_value = "polarity,random", value_delimiter = ',')]
    pub strategies: Vec<String>,
}
