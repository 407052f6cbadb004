//! `mindisc`: solve, analyze, fill and run the reference fixtures.
//!
//! Exit codes: 0 when every check passes, 2 when a check fails, 1 on error.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "mindisc", version, about = "Parametric minimal discs in metric spaces")]
pub struct Cli {
    /// Caps module parallelism; 1 runs sequentially. Falls back to MINDISC_THREADS.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a Plateau problem; writes solution.json and trace.csv.
    Solve(SolveArgs),
    /// Build the intrinsic disc of a solution and run the checks.
    Analyze(AnalyzeArgs),
    /// Estimate the filling area of a metric circle.
    Fill(FillArgs),
    /// Print the Jacobians of a norm as CSV.
    Areas(AreasArgs),
    /// Run the reference fixtures end to end and print the acceptance table.
    Fixtures(FixturesArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem JSON.
    pub problem: PathBuf,
    #[arg(short, long, value_name = "DIR")]
    pub output: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub rings: Option<usize>,
    #[arg(long, value_name = "LAMBDA")]
    pub lambda_e: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Skip the inner variation pass.
    #[arg(long)]
    pub no_inner_variation: bool,
    /// Also draw the objective trace as trace.svg.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Directory holding solution.json.
    pub solution_dir: PathBuf,
    /// Comma-separated checks, or `all`.
    #[arg(long, default_value = "all")]
    pub checks: String,
    /// Check configuration JSON.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory; defaults to the solution directory.
    #[arg(short, long, value_name = "DIR")]
    pub output: Option<PathBuf>,
    /// Uniform slack for every check.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Seed of the sampled checks.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Emit level-set and Voronoi-cell drawings of the domain.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct FillArgs {
    /// Distance-matrix CSV or polyline JSON.
    pub curve: PathBuf,
    #[arg(long, default_value = "busemann_hausdorff")]
    pub mu: String,
    /// Mesh rings; defaults to one ring per six samples.
    #[arg(long)]
    pub rings: Option<usize>,
    /// Slack of the isoperimetric bound.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, value_name = "LAMBDA")]
    pub lambda_e: Option<f64>,
    #[arg(short, long, value_name = "DIR", default_value = ".")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct AreasArgs {
    /// Norm JSON.
    #[arg(long, value_name = "FILE")]
    pub norm: PathBuf,
    /// Area definition, or `all` for the three with known constants.
    #[arg(long, default_value = "all")]
    pub mu: String,
}

#[derive(Debug, Args)]
pub struct FixturesArgs {
    /// Mesh rings for every fixture; each has its own default.
    #[arg(long)]
    pub rings: Option<usize>,
    #[arg(short, long, value_name = "DIR")]
    pub output: PathBuf,
    /// Comma-separated subset of flat, cone, collapsed_disc, square_sup.
    #[arg(long)]
    pub only: Option<String>,
    /// Emit domain drawings per fixture.
    #[arg(long)]
    pub svg: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let outcome = RunConfig::from_cli(&cli).and_then(|cfg| commands::run(&cfg, &cli.command));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
