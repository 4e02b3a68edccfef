use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

mod commands;
mod output;

/// Error in the invocation itself (bad names, bad dimensions, bad config).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "regret-lab", version, about = "Closed forms, game solvers and simulators for expert-advice regret")]
pub struct Cli {
    /// Worker threads (1 = sequential, 0 = all cores). Default 1.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Base seed for Monte Carlo streams. Default 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Emit structured JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// JSON object of parameters; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Evaluate a closed-form function at a point.
    Eval(EvalArgs),
    /// Solve the discrete game by value iteration and write the grid.
    Solve(SolveArgs),
    /// Summarize a saved grid against the continuum limit.
    Report(ReportArgs),
    /// Monte Carlo runs.
    Simulate {
        #[command(subcommand)]
        kind: SimKind,
    },
    /// Run a verification suite; exit 1 if any check fails.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
pub enum SimKind {
    /// Play the discrete game under geometric stopping.
    Game(GameArgs),
    /// Reflected Brownian motion local-time functional.
    Rbm(RbmArgs),
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct EvalArgs {
    /// u4, u3, v3, V2d, V1, V2, f, r1, h, r2, grad, hess, comb, argmax, phi
    #[serde(default)]
    pub function: Option<String>,
    /// Point coordinates.
    #[arg(allow_negative_numbers = true)]
    #[serde(default)]
    pub point: Vec<f64>,
    /// Tolerance for argmax.
    #[arg(long)]
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct SolveArgs {
    #[arg(long)]
    #[serde(default)]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub delta: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub radius: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub tol: Option<f64>,
    /// continuum_closure (default) or phi
    #[arg(long)]
    #[serde(default)]
    pub boundary: Option<String>,
    /// minimax (default) or balanced_comb
    #[arg(long)]
    #[serde(default)]
    pub dynamics: Option<String>,
    /// Grid JSON output path.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct ReportArgs {
    /// Grid JSON written by `solve`.
    #[arg(long)]
    #[serde(default)]
    pub grid: Option<PathBuf>,
    /// Optional point at which to compare the rescaled value with the limit.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    #[serde(default)]
    pub x: Vec<f64>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct GameArgs {
    #[arg(long)]
    #[serde(default)]
    pub delta: Option<f64>,
    /// Initial regret vector (2 to 4 entries). Default: four zeros.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    #[serde(default)]
    pub x0: Vec<f64>,
    #[arg(long)]
    #[serde(default)]
    pub episodes: Option<usize>,
    /// balanced_comb, pure_comb, fixed_subset, custom
    #[arg(long)]
    #[serde(default)]
    pub nature: Option<String>,
    /// gradient_u, uniform, follow_leader, mw
    #[arg(long)]
    #[serde(default)]
    pub player: Option<String>,
    /// Learning rate for the mw player.
    #[arg(long)]
    #[serde(default)]
    pub eta: Option<f64>,
    /// 1-based members for fixed_subset, e.g. 2,4
    #[arg(long)]
    #[serde(default)]
    pub subset: Option<String>,
    /// Probabilities over the 2^N subset masks for custom.
    #[arg(long, num_args = 1..)]
    #[serde(default)]
    pub probs: Vec<f64>,
    /// CSV output path.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct RbmArgs {
    /// Start point: three gaps, or two for the reduced system.
    #[arg(long, num_args = 1..)]
    #[serde(default)]
    pub y0: Vec<f64>,
    #[arg(long)]
    #[serde(default)]
    pub dt: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub horizon: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub paths: Option<usize>,
    /// CSV output path.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct VerifyArgs {
    /// hjb, vpde, reflections, hyperbolic, combgaps, regularity, convergence, all
    #[serde(default)]
    pub suite: Option<String>,
    /// Smaller solves in the convergence suite.
    #[arg(long)]
    #[serde(default)]
    pub quick: bool,
    /// Sobol points for the four-expert checks.
    #[arg(long)]
    #[serde(default)]
    pub points: Option<usize>,
    /// Points per face for the v checks.
    #[arg(long)]
    #[serde(default)]
    pub face_points: Option<usize>,
    /// Report JSON output path.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<regret_lab::Error>() {
        Some(
            regret_lab::Error::InvalidParameter { .. }
            | regret_lab::Error::Dimension { .. }
            | regret_lab::Error::NonFinite { .. }
            | regret_lab::Error::NegativeGap { .. }
            | regret_lab::Error::OutOfTruncation { .. }
            | regret_lab::Error::GridVersion(_),
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
