//! `hyperbayes`: ingest datasets, reconstruct hypergraphs from projected
//! graphs and regenerate every experiment table.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 internal invariant
//! violation.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperbayes::channel::Snr;
use hyperbayes::ingest::DatasetFormat;
use hyperbayes::{Error, ModelParams, SamplerConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Invariant(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "hyperbayes",
    version,
    about = "Bayesian hypergraph reconstruction from pairwise projections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert relational dataset files into one .hg hypergraph.
    Ingest(IngestArgs),
    /// Generate a planted synthetic hypergraph.
    Plant(PlantArgs),
    /// Reconstruct a hypergraph from a .pg graph or the projection of a .hg file.
    Reconstruct(ReconstructArgs),
    /// Recovery accuracy across channel SNRs.
    SweepSnr(SweepSnrArgs),
    /// Compression rate and recovery across edge-size limits.
    SweepLength(SweepLengthArgs),
    /// Compare sampler MAPs with exhaustive search on small random graphs.
    OracleCheck(OracleCheckArgs),
    /// Time the sampling loop on planted instances.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Per-hyperedge pair emission probability p.
    #[arg(long = "params-p", default_value_t = 0.99)]
    pub p: f64,
    /// Sparsity weight per hyperedge.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Penalty per duplicate hyperedge copy.
    #[arg(long, default_value_t = 5.0)]
    pub gamma: f64,
    /// Largest admissible hyperedge size L.
    #[arg(long, default_value_t = 6)]
    pub max_edge_size: usize,
}

impl ModelArgs {
    pub fn params(&self) -> Result<ModelParams, CliError> {
        let params = ModelParams {
            p: self.p,
            beta: self.beta,
            gamma: self.gamma,
            max_edge_size: self.max_edge_size,
            observed_vertices: None,
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Args, Debug, Clone)]
pub struct SamplerArgs {
    #[arg(long, default_value_t = 20_000)]
    pub iterations: u64,
    /// Defaults to iterations / 10.
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Abort clique enumeration beyond this many maximal cliques.
    #[arg(long, default_value_t = hyperbayes::cliques::DEFAULT_CLIQUE_CAP)]
    pub clique_cap: usize,
}

impl SamplerArgs {
    pub fn config(&self, params: ModelParams) -> Result<SamplerConfig, CliError> {
        let mut cfg = SamplerConfig::new(self.iterations, self.seed, params);
        if let Some(b) = self.burn_in {
            cfg.burn_in = b;
        }
        cfg.clique_cap = self.clique_cap;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum IngestFormat {
    NaryTsv,
    SimplexList,
    Hg,
}

impl From<IngestFormat> for DatasetFormat {
    fn from(f: IngestFormat) -> Self {
        match f {
            IngestFormat::NaryTsv => DatasetFormat::NaryTsv,
            IngestFormat::SimplexList => DatasetFormat::SimplexList,
            IngestFormat::Hg => DatasetFormat::Hg,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    /// Hypergraph; projected before reconstruction and kept as ground truth.
    Hg,
    /// Pairwise graph.
    Pg,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Dataset files of one format; their facts are concatenated.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub format: IngestFormat,
    /// Keep a uniform sample of this many distinct hyperedges.
    #[arg(long)]
    pub subsample_edges: Option<usize>,
    /// Seed for --subsample-edges.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PlantArgs {
    #[arg(long, default_value_t = 200)]
    pub vertices: usize,
    #[arg(long, default_value_t = 300)]
    pub edges: usize,
    #[arg(long, default_value_t = 2)]
    pub min_size: usize,
    #[arg(long, default_value_t = 5)]
    pub max_size: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    pub input: PathBuf,
    /// Input format; inferred from the .hg / .pg extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<GraphFormat>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Send the graph through the AWGN channel at this SNR (dB, or "inf").
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<Snr>,
    #[arg(long, default_value_t = 1)]
    pub channel_seed: u64,
    /// Keep a uniform sample of this many distinct hyperedges of a .hg input.
    #[arg(long)]
    pub subsample_edges: Option<usize>,
    /// Write every n-th iteration to trace.csv.
    #[arg(long, default_value_t = 1)]
    pub trace_stride: u64,
    /// Recompute the projection after every accepted move.
    #[arg(long)]
    pub verify_projection: bool,
    /// Also write convergence.csv with wall-clock times.
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SweepSnrArgs {
    /// Ground-truth hypergraph (.hg).
    pub input: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Comma-separated SNR points in dB; "inf" is the noiseless channel.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "-10,0,10,20,30"
    )]
    pub snr_db: Vec<Snr>,
    /// Seeds per SNR point; seed k uses channel seed and sampler seed offset by k.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value_t = 1)]
    pub channel_seed: u64,
    #[arg(long)]
    pub subsample_edges: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SweepLengthArgs {
    /// Ground-truth hypergraph (.hg).
    pub input: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Comma-separated edge-size limits; overrides --max-edge-size.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7,8")]
    pub lengths: Vec<usize>,
    #[arg(long)]
    pub subsample_edges: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct OracleCheckArgs {
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 50_000)]
    pub iterations: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub min_vertices: usize,
    #[arg(long, default_value_t = 6)]
    pub max_vertices: usize,
    #[arg(long, default_value_t = 0.5)]
    pub edge_prob: f64,
    #[arg(long, default_value_t = 2)]
    pub max_multiplicity: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Comma-separated VxE instance sizes, e.g. 100x100,1000x100.
    #[arg(long, value_delimiter = ',', default_value = "100x100,1000x100")]
    pub sizes: Vec<String>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Fixed iteration count per instance.
    #[arg(long, conflicts_with = "iterations_per_edge")]
    pub iterations: Option<u64>,
    /// Iterations proportional to |E| (used when --iterations is absent).
    #[arg(long, default_value_t = 20)]
    pub iterations_per_edge: u64,
    /// Repeats per instance; the fastest is reported.
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Worker count: `HYPERBAYES_THREADS` if set, else the available cores.
pub fn threads() -> Result<usize, CliError> {
    match std::env::var("HYPERBAYES_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("HYPERBAYES_THREADS must be a positive integer, got '{v}'"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(&a),
        Command::Plant(a) => commands::plant(&a),
        Command::Reconstruct(a) => commands::reconstruct(&a),
        Command::SweepSnr(a) => commands::sweep_snr(&a),
        Command::SweepLength(a) => commands::sweep_length(&a),
        Command::OracleCheck(a) => commands::oracle_check(&a),
        Command::Bench(a) => commands::bench(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hyperbayes: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
