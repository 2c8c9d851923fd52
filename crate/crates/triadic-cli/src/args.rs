//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use triadic::procedures::CalibrationKind;

#[derive(Debug, Parser)]
#[command(
    name = "triadic",
    version,
    about = "Simultaneous testing of hypotheses and alternatives with three-decision output"
)]
pub struct Cli {
    /// Flat key=value configuration file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Familywise significance level (default 0.05).
    #[arg(long, global = true)]
    pub alpha: Option<f64>,

    /// Per-test level calibration (default bonferroni).
    #[arg(long, global = true, value_enum)]
    pub calibration: Option<CalibrationArg>,

    /// Output format (default table).
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,

    /// RNG seed; falls back to TRIADIC_SEED, then 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify p-value couples from a CSV file into D1/D2/D3.
    Test(TestArgs),
    /// Monte Carlo estimates of FWER, E(|G|) and risk for a model.
    Simulate(SimulateArgs),
    /// Check that closure and single-step decisions coincide on random
    /// complementary p-vectors.
    ClosureCheck(ClosureCheckArgs),
    /// Compare the nested closure procedure against the Bonferroni
    /// procedure over a grid of sample means.
    Counterexample(CounterexampleArgs),
    /// Three-way edge classification from a data matrix of observations.
    Graph(GraphArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CalibrationArg {
    Bonferroni,
    Independent,
}

impl CalibrationArg {
    pub fn kind(self) -> CalibrationKind {
        match self {
            CalibrationArg::Bonferroni => CalibrationKind::Bonferroni,
            CalibrationArg::Independent => CalibrationKind::IndependentExact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Gaussian,
    Nested,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcedureArg {
    SingleStep,
    Closure,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Input CSV with header `index,p_h[,p_k]`; a trailing decision column
    /// is ignored, so csv output re-ingests cleanly.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Accept non-complementary pairs; the alternative side is then tested
    /// on p_k directly and the report flags the override.
    #[arg(long)]
    pub allow_noncomplementary: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Which model to simulate (default gaussian).
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,

    /// Number of couples for the Gaussian means model.
    #[arg(long)]
    pub m: Option<usize>,

    /// True means; one value is replicated across all couples.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub theta: Option<Vec<f64>>,

    /// Per-coordinate sample size.
    #[arg(long)]
    pub n: Option<u64>,

    /// Lower threshold of the nested model.
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: Option<f64>,

    /// Upper threshold of the nested model.
    #[arg(long, allow_negative_numbers = true)]
    pub theta2: Option<f64>,

    /// Procedure to apply (default single-step; closure needs the nested
    /// model).
    #[arg(long, value_enum)]
    pub procedure: Option<ProcedureArg>,

    /// Monte Carlo replicates (default 10000).
    #[arg(long)]
    pub replicates: Option<u64>,

    /// Identity-mode uncertainty penalty b in [0, 1] (default 0.5).
    #[arg(long)]
    pub loss_b: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ClosureCheckArgs {
    /// Family size (default 3, at most 6).
    #[arg(long)]
    pub m: Option<usize>,

    /// Random p-vectors to draw (default 10000).
    #[arg(long)]
    pub replicates: Option<u64>,

    /// Run against the nested two-couple family instead; the check then
    /// fails its free-combination precondition.
    #[arg(long)]
    pub nested: bool,

    #[arg(long, allow_negative_numbers = true)]
    pub theta1: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    pub theta2: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    /// Lower threshold (default 0).
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: Option<f64>,

    /// Upper threshold (default 10).
    #[arg(long, allow_negative_numbers = true)]
    pub theta2: Option<f64>,

    /// Sample size (default 1).
    #[arg(long)]
    pub n: Option<u64>,

    /// Grid start (default theta1 - 3/sqrt(n)).
    #[arg(long, allow_negative_numbers = true)]
    pub grid_min: Option<f64>,

    /// Grid end (default theta2 + 3/sqrt(n)).
    #[arg(long, allow_negative_numbers = true)]
    pub grid_max: Option<f64>,

    /// Number of grid points (default 101).
    #[arg(long)]
    pub grid_steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Input CSV data matrix: header row names the variables, each data row
    /// is one observation.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Correlation threshold defining an edge (default 0).
    #[arg(long)]
    pub rho0: Option<f64>,
}
