use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "tucker",
    version,
    about = "Truncated Tucker compression of dense tensors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic tensor.
    #[command(subcommand)]
    Synth(SynthKind),
    /// Compress a tensor and print one CSV record.
    Compress(CompressArgs),
    /// Expand a Tucker file back into a dense tensor.
    Reconstruct(ReconstructArgs),
    /// Describe a tensor or Tucker file.
    Inspect(InspectArgs),
    /// Run a repeated benchmark and write aggregated CSV.
    Bench(BenchArgs),
}

#[derive(Subcommand, Debug)]
pub enum SynthKind {
    /// Sum of rank-one terms with random weights.
    Cp(CpArgs),
    /// Random core times random orthonormal factors.
    Tucker(TuckerArgs),
}

#[derive(Args, Debug)]
pub struct SynthCommon {
    /// Extents, e.g. 20,20,2000.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    /// Relative noise level δ.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the noiseless tensor here.
    #[arg(long)]
    pub base_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CpArgs {
    #[command(flatten)]
    pub common: SynthCommon,
    #[arg(long)]
    pub rank: usize,
}

#[derive(Args, Debug)]
pub struct TuckerArgs {
    #[command(flatten)]
    pub common: SynthCommon,
    #[arg(long, value_delimiter = ',', required = true)]
    pub ranks: Vec<usize>,
}

/// A one-pass method: `t-` or `st-` followed by the factor engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Variant {
    pub sequential: bool,
    pub engine: EngineKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineKind {
    Svd,
    Eig,
    Als,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant {
            sequential: false,
            engine: EngineKind::Svd,
        },
        Variant {
            sequential: false,
            engine: EngineKind::Eig,
        },
        Variant {
            sequential: false,
            engine: EngineKind::Als,
        },
        Variant {
            sequential: true,
            engine: EngineKind::Svd,
        },
        Variant {
            sequential: true,
            engine: EngineKind::Eig,
        },
        Variant {
            sequential: true,
            engine: EngineKind::Als,
        },
    ];
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let engine = match self.engine {
            EngineKind::Svd => "svd",
            EngineKind::Eig => "eig",
            EngineKind::Als => "als",
        };
        write!(f, "{}-{engine}", if self.sequential { "st" } else { "t" })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Variant::ALL
            .into_iter()
            .find(|v| v.to_string() == s)
            .ok_or_else(|| {
                format!(
                    "unknown method '{s}' (expected t-svd, t-eig, t-als, st-svd, st-eig or st-als)"
                )
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Single(Variant),
    Hooi,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "hooi" {
            Ok(Method::Hooi)
        } else {
            s.parse().map(Method::Single)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderArg {
    Auto,
    Fixed(Vec<usize>),
}

impl FromStr for OrderArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(OrderArg::Auto);
        }
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|e| format!("bad mode '{p}': {e}"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(OrderArg::Fixed)
    }
}

/// Settings shared by everything that runs a decomposition.
#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// ALS stopping tolerance.
    #[arg(long, default_value_t = 1e-4)]
    pub eta: f64,
    /// ALS sweep limit per mode.
    #[arg(long, default_value_t = 50)]
    pub max_iters: usize,
    /// Mode order for st- methods: `auto` or a permutation like 2,1,3.
    #[arg(long, default_value = "auto")]
    pub order: OrderArg,
    /// Rotate factors onto the leading singular vectors.
    #[arg(long)]
    pub singular_vectors: bool,
    /// ALS initialization seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct CompressArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub ranks: Vec<usize>,
    /// t-svd, t-eig, t-als, st-svd, st-eig, st-als or hooi.
    #[arg(long, default_value = "st-als")]
    pub method: Method,
    /// Warm start used by hooi.
    #[arg(long, default_value = "t-als")]
    pub init: Variant,
    /// Stopping tolerance on the change in fit for hooi.
    #[arg(long, default_value_t = 1e-12)]
    pub hooi_tol: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Print the CSV header line before the record.
    #[arg(long)]
    pub header: bool,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct InspectArgs {
    pub input: PathBuf,
    /// Dense tensor to measure the relative error against.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Cp,
    Tucker,
    Scaling,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Suite::Cp)]
    pub suite: Suite,
    /// Methods to compare; defaults to all six, or t-als,st-als for scaling.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Generator rank for the cp suite.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Truncation, and core ranks for the tucker and scaling suites.
    #[arg(long, value_delimiter = ',')]
    pub ranks: Option<Vec<usize>>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Thread counts; the scaling suite sweeps all of them.
    #[arg(long, value_delimiter = ',')]
    pub threads: Option<Vec<usize>>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// CSV destination (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
