use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use specstat::NoiseLaw;

use crate::ingest::{ColumnSelector, IngestOptions};

#[derive(Debug, Parser)]
#[command(
    name = "specstat",
    version,
    about = "Test a time series for a time-constant spectral density"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the test and write a JSON report (exit code 3 on rejection).
    Test(TestArgs),
    /// Q-profile as TSV (t, u, Q).
    Qprofile(QprofileArgs),
    /// Cross-validation scores of the global bandwidth.
    Cv(CvArgs),
    /// Approximate power against a time-varying spectrum.
    Power(PowerArgs),
    /// Generate a series, or run a Monte Carlo study with --runs.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Delimited text file (comma, tab or whitespace); `-` reads standard input.
    pub input: PathBuf,
    /// 1-based column position or header name.
    #[arg(long, default_value = "1")]
    pub column: ColumnSelector,
    /// Lines to drop before parsing.
    #[arg(long, default_value_t = 0)]
    pub header_skip: usize,
    /// Use first differences.
    #[arg(long)]
    pub difference: bool,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub demean: bool,
    /// Add N(0, sd²) noise after differencing.
    #[arg(long, default_value_t = 0.0)]
    pub jitter_sd: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl InputArgs {
    pub fn options(&self) -> IngestOptions {
        IngestOptions {
            column: self.column.clone(),
            header_skip: self.header_skip,
            difference: self.difference,
            demean: self.demean,
            jitter_sd: self.jitter_sd,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TestParams {
    /// Segment length (even); defaults to the largest even integer ≤ n^0.58.
    #[arg(long)]
    pub m: Option<usize>,
    /// Overlap factor; segments shift by ⌊m/c⌋.
    #[arg(long, default_value_t = 1)]
    pub c: usize,
    /// Global bandwidth; chosen by cross-validation when absent.
    #[arg(long)]
    pub h: Option<f64>,
    /// Local bandwidth; h(n/m)^{1/4} when absent.
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value = "bartlett-priestley")]
    pub kernel: String,
    #[arg(long, default_value = "cosine")]
    pub taper: String,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: TestParams,
    /// Report path; sidecar TSVs are written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Evaluate the Q-profile sidecar every k observations instead of at the plan centres.
    #[arg(long)]
    pub qprofile_stride: Option<usize>,
    /// Include wall-clock timing (makes the report non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct QprofileArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: TestParams,
    #[arg(long)]
    pub qprofile_stride: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "bartlett-priestley")]
    pub kernel: String,
    /// Number of log-spaced candidates in [2π/√n, π/2].
    #[arg(long, default_value_t = 12)]
    pub grid_size: usize,
    /// Explicit candidates, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub h_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcessChoice {
    Iid,
    /// Stationary AR(1) with φ = --start.
    Ar1,
    /// AR(1) with φ(u) running linearly from --start to --end.
    Tvar1,
    /// X_t = ε_t + θ(u)ε_{t−1}, θ running linearly from --start to --end.
    Tvma1,
    /// X_t = √(1 + a cos(2πt/n)) ε_t with a = --amplitude.
    CosineModulated,
    /// AR(1) background with two injected high-variance stretches.
    Tremor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseChoice {
    Gaussian,
    CenteredExponential,
    Uniform,
}

impl From<NoiseChoice> for NoiseLaw {
    fn from(c: NoiseChoice) -> Self {
        match c {
            NoiseChoice::Gaussian => NoiseLaw::Gaussian,
            NoiseChoice::CenteredExponential => NoiseLaw::CenteredExponential,
            NoiseChoice::Uniform => NoiseLaw::Uniform,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProcessArgs {
    #[arg(long, value_enum, default_value_t = ProcessChoice::Iid)]
    pub process: ProcessChoice,
    #[arg(long, default_value_t = 0.9)]
    pub start: f64,
    #[arg(long, default_value_t = -0.9, allow_negative_numbers = true)]
    pub end: f64,
    #[arg(long, default_value_t = 0.5)]
    pub amplitude: f64,
    #[arg(long, value_enum, default_value_t = NoiseChoice::Gaussian)]
    pub noise: NoiseChoice,
    /// JSON process description; overrides --process.
    #[arg(long)]
    pub spec_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PowerArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    /// Tabulated f(u, λ) with columns u, lambda, f; overrides --process.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Fourth cumulant of the innovations for a tabulated spectrum.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub kappa4: f64,
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub params: TestParams,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo replications; emits a JSON summary instead of a series.
    #[arg(long)]
    pub runs: Option<usize>,
    #[command(flatten)]
    pub params: TestParams,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
