//! `kcausal`: kernel estimators of causal response curves from CSV data.
//!
//! Exit codes: 0 success, 2 configuration or schema error, 3 numerical
//! failure, 4 I/O error.

mod commands;
mod error;
mod io;
mod options;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::options::GridSpec;

#[derive(Debug, Parser)]
#[command(
    name = "kcausal",
    version,
    about = "Kernel ridge estimators of dose, heterogeneous and incremental response curves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a synthetic dataset.
    Simulate(SimulateArgs),
    /// Estimate a response curve on a grid.
    Estimate(EstimateArgs),
    /// Monte Carlo study of grid MSE against the analytic truth.
    Study(StudyArgs),
    /// Herded samples from a counterfactual outcome distribution.
    Herd(HerdArgs),
    /// Resolve the penalties an estimand would use.
    Tune(TuneArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Design {
    Dose,
    Hte,
}

impl From<Design> for kernel_causal::simulate::DesignKind {
    fn from(d: Design) -> Self {
        match d {
            Design::Dose => Self::Dose,
            Design::Hte => Self::Hte,
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    design: Design,
    /// Sample size.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Data, kernel and penalty options shared by the estimation commands.
#[derive(Debug, Args)]
struct FitArgs {
    /// CSV with columns y, d, optional v, and x1..xp.
    #[arg(long)]
    data: PathBuf,
    /// ate, ds, att, cate, inc_ate, inc_att or frontdoor.
    #[arg(long)]
    estimand: String,
    /// Penalty policy, optionally per stage: `loocv`, `gcv:1e-6,1,30`,
    /// `lambda1=fixed:0.01`, `theoretical:inf,2`. Default loocv.
    #[arg(long = "penalty")]
    penalties: Vec<String>,
    /// Kernel, optionally per block: `median`, `d=exact`, `x=ls:0.5,1.2`.
    /// Default median.
    #[arg(long = "kernel")]
    kernels: Vec<String>,
    /// CSV with columns x1..xp drawn from the shifted population (ds only).
    #[arg(long)]
    alt_covariates: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    fit: FitArgs,
    /// Grid `min,max,count`; give it twice for att, inc_att and cate. The
    /// evaluation points are the product of the grids.
    #[arg(long = "grid", required = true, allow_hyphen_values = true)]
    grids: Vec<GridSpec>,
    /// Output CSV; the JSON sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct StudyArgs {
    #[arg(long, value_enum)]
    design: Design,
    /// Sample sizes, comma separated.
    #[arg(long = "n", value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    replications: usize,
    /// Base seed; replication r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "penalty")]
    penalties: Vec<String>,
    /// Evaluation grid `min,max,count` (d for dose, v for hte).
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<GridSpec>,
    /// Output CSV; the JSON summary is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct HerdArgs {
    #[command(flatten)]
    fit: FitArgs,
    /// Evaluation point: d, then d′ (att) or v (cate).
    #[arg(long = "at", required = true, allow_negative_numbers = true)]
    at: Vec<f64>,
    /// Number of samples.
    #[arg(long)]
    m: usize,
    /// Candidate grid `min,max,count`; default 512 points over the outcome
    /// range widened by half its width on each side.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<GridSpec>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[command(flatten)]
    fit: FitArgs,
    /// Also resolve the outcome-embedding penalty lambda3.
    #[arg(long)]
    distribution: bool,
    /// Output JSON; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
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
        Command::Simulate(a) => commands::simulate(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Study(a) => commands::study(a),
        Command::Herd(a) => commands::herd(a),
        Command::Tune(a) => commands::tune(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
