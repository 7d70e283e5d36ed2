use std::path::PathBuf;

use aoi_core::Policy;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "aoi", version, about = "Age of information of source 1 in a two-source queue with packet management")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the numeric and printed closed-form MGF over a range of s.
    Analyze(AnalyzeArgs),
    /// First and second moments of the age from the numeric MGF.
    Moments(MomentsArgs),
    /// Mean and standard deviation of the age as lambda1 sweeps (0, lambda-total).
    Sweep(SweepArgs),
    /// Discrete-event simulation of the queue.
    Simulate(SimulateArgs),
    /// Cross-check the engines and printed formulas on a parameter grid.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    #[value(name = "self")]
    SelfPreemptive,
    #[value(name = "nonpre")]
    NonPreemptive,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Policy {
        match p {
            PolicyArg::SelfPreemptive => Policy::SelfPreemptive,
            PolicyArg::NonPreemptive => Policy::NonPreemptive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicySet {
    #[value(name = "self")]
    SelfPreemptive,
    #[value(name = "nonpre")]
    NonPreemptive,
    Both,
}

impl PolicySet {
    pub fn policies(self) -> Vec<Policy> {
        match self {
            PolicySet::SelfPreemptive => vec![Policy::SelfPreemptive],
            PolicySet::NonPreemptive => vec![Policy::NonPreemptive],
            PolicySet::Both => Policy::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct Rates {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda1: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda2: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub mu: f64,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[arg(long, value_enum)]
    pub policy: PolicyArg,
    #[command(flatten)]
    pub rates: Rates,
    /// Smallest s; defaults to -2 mu.
    #[arg(long, allow_hyphen_values = true)]
    pub s_min: Option<f64>,
    /// Largest s; must lie below s0 = mu min(rho1, 1). Defaults to 0.9 s0.
    #[arg(long, allow_hyphen_values = true)]
    pub s_max: Option<f64>,
    #[arg(long, default_value_t = 101)]
    pub s_steps: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    #[arg(long, value_enum)]
    pub policy: PolicyArg,
    #[command(flatten)]
    pub rates: Rates,
    /// Source whose age is reported.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub source: u8,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 5.0)]
    pub lambda_total: f64,
    /// Number of interior lambda1 points.
    #[arg(long, default_value_t = 49)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = PolicySet::Both)]
    pub policy: PolicySet,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub policy: PolicyArg,
    #[command(flatten)]
    pub rates: Rates,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Events per replication, warmup included.
    #[arg(long, default_value_t = 1_000_000)]
    pub events: u64,
    #[arg(long, default_value_t = 20)]
    pub batches: usize,
    #[arg(long, default_value_t = 0.1)]
    pub warmup: f64,
    #[arg(long, default_value_t = 1)]
    pub replications: usize,
    /// MGF arguments to estimate, comma separated.
    #[arg(long = "s", value_delimiter = ',', allow_hyphen_values = true)]
    pub s_probes: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Simulation events per grid point and policy; 0 skips the simulation checks.
    #[arg(long, default_value_t = 1_000_000)]
    pub sim_events: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub batches: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
    #[command(flatten)]
    pub output: Output,
}
