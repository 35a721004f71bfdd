use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use plap::integrate::Method;

#[derive(Parser, Debug)]
#[command(name = "plap", version, about = "p-Laplacian reaction-diffusion on weighted networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate u_t = Δ_p u + f(u) from u0 and report the outcome.
    Simulate(SimulateArgs),
    /// First eigenvalue and eigenfunction of Δ_p under the boundary condition.
    Eigen(EigenArgs),
    /// Check growth condition A, B or C on a grid.
    CheckCondition(CheckArgs),
    /// Evaluate A(0) and B(0) for given initial data.
    B0(B0Args),
    /// Construct interior-constant initial data with B(0) > 0.
    FindInitial(FindInitialArgs),
    /// Integrate two ordered initial states in lockstep and report their gap.
    Compare(CompareArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Network JSON with boundary coefficients.
    #[arg(long)]
    pub graph: PathBuf,
    /// Exponent p > 1.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Seed for every randomized step.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for summary.json and data files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Reaction {
    /// `power:lambda=L,q=Q`, `powerc:lambda=L,q=Q,c=C` or `table:PATH`.
    #[arg(long = "f")]
    pub f: String,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Condition {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// First eigenvalue; computed from the graph when omitted.
    #[arg(long)]
    pub lambda0: Option<f64>,
    /// Eigen solver restarts.
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct Integrator {
    #[arg(long)]
    pub dt0: Option<f64>,
    #[arg(long)]
    pub dtmin: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long = "blow-threshold")]
    pub blow_threshold: Option<f64>,
    /// `rk4` or `euler`.
    #[arg(long, default_value = "rk4")]
    pub method: Method,
    /// Record every n-th accepted step.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub reaction: Reaction,
    /// Vertex CSV or `const:C`.
    #[arg(long)]
    pub u0: String,
    #[command(flatten)]
    pub integrator: Integrator,
    #[command(flatten)]
    pub condition: Condition,
}

#[derive(Args, Debug)]
pub struct EigenArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Network used to compute the first eigenvalue.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub reaction: Reaction,
    #[command(flatten)]
    pub condition: Condition,
    /// `A`, `B` or `C`.
    #[arg(long, default_value = "C")]
    pub which: String,
    #[arg(long = "grid-lo")]
    pub grid_lo: Option<f64>,
    #[arg(long = "grid-hi")]
    pub grid_hi: Option<f64>,
    #[arg(long = "grid-points")]
    pub grid_points: Option<usize>,
}

#[derive(Args, Debug)]
pub struct B0Args {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub reaction: Reaction,
    #[arg(long)]
    pub u0: String,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// With α > 2, also report the blow-up time bound.
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Args, Debug)]
pub struct FindInitialArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub reaction: Reaction,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long)]
    pub gamma1: f64,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub reaction: Reaction,
    /// Upper initial state.
    #[arg(long)]
    pub u0: String,
    /// Lower initial state.
    #[arg(long = "u0-low")]
    pub u0_low: String,
    /// Strict positivity is measured from this time on.
    #[arg(long = "strict-from", default_value_t = 0.0)]
    pub strict_from: f64,
    #[command(flatten)]
    pub integrator: Integrator,
}
