use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "mhsic", version, about = "Kernel joint-independence tests and ANM causal discovery")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one HSIC estimate.
    Estimate(EstimateArgs),
    /// Run a permutation test of joint independence.
    Test(TestArgs),
    /// Rejection rate over repeated draws for a grid of sample sizes (CSV).
    Power(PowerArgs),
    /// Rank candidate DAGs by the p-value of their residual independence test.
    Discover(DiscoverArgs),
    /// Re-run the command recorded in an output's manifest.
    Replay(ReplayArgs),
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct DataArgs {
    /// CSV file, one joint observation per row.
    #[arg(long, conflicts_with = "generate")]
    pub input: Option<PathBuf>,
    /// Synthetic data: `indep[:M[:d]]`, `linear[:noise_sd]` or `anm[:M]`.
    #[arg(long)]
    pub generate: Option<String>,
    /// Sample size for `--generate`.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// The CSV starts with a header row.
    #[arg(long)]
    pub header: bool,
    /// CSV field separator (a single ASCII character, or `tab`).
    #[arg(long, default_value = ",")]
    pub delimiter: String,
    /// Column roles, e.g. `1,1,2,-`: one-based component per column, `-` drops it.
    #[arg(long)]
    pub columns: Option<String>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct MethodArgs {
    /// vhsic, nmhsic, nhsic0 or uhsic.
    #[arg(long, default_value = "vhsic")]
    pub estimator: String,
    /// Landmark count: `<c>sqrt` for ⌈c·√n⌉, or an integer.
    #[arg(long, default_value = "2sqrt")]
    pub nystrom: String,
    /// Kernel bandwidth: `median` or `fixed:<gamma>` for k(x,y) = exp(-gamma·|x-y|²).
    #[arg(long, default_value = "median")]
    pub gamma: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report wall-clock timings (makes the output run-dependent).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct PermutationArgs {
    #[arg(long, default_value_t = 250)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Keep the observed statistic's landmarks in every permutation round.
    #[arg(long)]
    pub freeze_plan: bool,
    /// Shuffle only the first component instead of components 2..M.
    #[arg(long)]
    pub permute_first: bool,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct TestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub perm: PermutationArgs,
    /// Include the permutation null samples in the output.
    #[arg(long)]
    pub emit_null: bool,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct PowerArgs {
    /// Synthetic data, as for the other commands.
    #[arg(long)]
    pub generate: String,
    /// Comma-separated sample sizes.
    #[arg(long, default_value = "50,100,150,200")]
    pub n_grid: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Comma-separated estimators, one block of rows each.
    #[arg(long, default_value = "vhsic,nmhsic")]
    pub estimators: String,
    #[arg(long, default_value = "2sqrt")]
    pub nystrom: String,
    #[arg(long, default_value = "median")]
    pub gamma: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub timings: bool,
    #[command(flatten)]
    pub perm: PermutationArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct DiscoverArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub perm: PermutationArgs,
    /// Candidate set: `all` DAGs (up to 4 nodes) or `full`y connected ones.
    #[arg(long, default_value = "all")]
    pub dags: String,
    /// Kernel ridge regression penalty.
    #[arg(long, default_value_t = crate::causal::DEFAULT_RIDGE)]
    pub ridge: f64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ReplayArgs {
    /// A previous output (JSON, or CSV with a `# manifest:` line).
    pub manifest: PathBuf,
    /// Compare the new output byte-for-byte against this file.
    #[arg(long)]
    pub verify: Option<PathBuf>,
}
