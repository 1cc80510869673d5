use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Radial solver for the power-coupled Monge-Ampère system on the unit ball.
#[derive(Debug, Parser)]
#[command(name = "ma-couple", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the system for one (N, alpha, beta, lambda, mu).
    Solve(SolveArgs),
    /// Threshold constant of the balanced system with beta = N^2/alpha.
    Eigen(EigenArgs),
    /// Classify a grid of exponent pairs.
    Sweep(SweepArgs),
    /// Re-check every gate of a stored run record.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct NumericArgs {
    /// Grid nodes (default: $MA_COUPLE_GRID or 2048).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Relative sup-norm change at which an iteration stops.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub dim: u32,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[command(flatten)]
    pub numeric: NumericArgs,
    /// Starting profile: parabola, linear or constant-on-cone.
    #[arg(long, default_value = "parabola")]
    pub init: String,
    /// JSON record path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Profile table `t,v1,v2,u1,u2`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Keep the per-iteration change in the record.
    #[arg(long)]
    pub trace: bool,
    /// Check the norm bounds on every iterate.
    #[arg(long)]
    pub check_bounds: bool,
    /// Stamp the record with the current Unix time.
    #[arg(long)]
    pub timestamp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EigenArgs {
    #[arg(long)]
    pub dim: u32,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[command(flatten)]
    pub numeric: NumericArgs,
    /// Compare C with the single-equation eigenvalue (requires alpha = N).
    #[arg(long)]
    pub cross_check: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub timestamp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub dim: u32,
    /// Comma-separated alpha values.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true, allow_negative_numbers = true)]
    pub alphas: Vec<f64>,
    /// Comma-separated beta values.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true, allow_negative_numbers = true)]
    pub betas: Vec<f64>,
    /// Worker threads (rows are emitted in input order regardless).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub numeric: NumericArgs,
    /// CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub record: PathBuf,
}
