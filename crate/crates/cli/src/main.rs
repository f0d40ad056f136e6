//! Command-line pipeline: ingest -> filter -> test -> simulate -> calibrate
//! -> report, against either the bundled data snapshot or fresh inputs.

mod chart;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{break_cmd, calibrate_cmd, gap_cmd, report_cmd, robustness_cmd, simulate_cmd};
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "nksim",
    version,
    about = "Behavioral New Keynesian simulation and calibration toolkit",
    propagate_version = true
)]
struct Cli {
    /// TOML run configuration; defaults reproduce the reference pipeline.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate output gaps from quarterly GDP (HP and/or Kalman) and plot them
    Gap(gap_cmd::GapArgs),
    /// Structural-break ANOVA on a dated gap series
    Break(break_cmd::BreakArgs),
    /// Simulate the behavioral or rational economy
    Simulate(simulate_cmd::SimulateArgs),
    /// Grid-search shock parameters against the data moments
    Calibrate(calibrate_cmd::CalibrateArgs),
    /// Stochastic AR(1) runs comparing normality across regimes
    Robustness(robustness_cmd::RobustnessArgs),
    /// Summarize the JSON reports in the output directory
    Report(report_cmd::ReportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match RunConfig::load(cli.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => return fail(e),
    };
    let result = match cli.command {
        Command::Gap(args) => gap_cmd::run(cfg, args),
        Command::Break(args) => break_cmd::run(cfg, args),
        Command::Simulate(args) => simulate_cmd::run(cfg, args),
        Command::Calibrate(args) => calibrate_cmd::run(cfg, args),
        Command::Robustness(args) => robustness_cmd::run(cfg, args),
        Command::Report(args) => report_cmd::run(cfg, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn fail(e: anyhow::Error) -> ExitCode {
    // single machine-parsable line on stderr
    eprintln!("error: {e:#}");
    ExitCode::from(2)
}
