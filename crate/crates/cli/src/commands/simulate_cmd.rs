use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use nksim_core::calibrate::ModelKind;
use nksim_core::report::Report;
use nksim_core::simulate::{extract_window, simulate_behavioral, simulate_rational, write_sim_csv};
use nksim_core::stats::moments;

use crate::commands::{ensure_out_dir, write_report};
use crate::config::RunConfig;

/// Simulate the behavioral or rational economy under the configured
/// shock scenario.
#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "behavioral")]
    pub model: Model,
    /// RNG seed override.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scenario overrides.
    #[arg(long)]
    pub eps1: Option<f64>,
    #[arg(long)]
    pub rho_eps: Option<f64>,
    #[arg(long)]
    pub eta1: Option<f64>,
    #[arg(long)]
    pub rho_eta: Option<f64>,
    /// Output csv path (default <out>/sim_<model>.csv).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Model {
    Behavioral,
    Rational,
}

impl From<Model> for ModelKind {
    fn from(m: Model) -> ModelKind {
        match m {
            Model::Behavioral => ModelKind::Behavioral,
            Model::Rational => ModelKind::Rational,
        }
    }
}

pub fn run(mut cfg: RunConfig, args: SimulateArgs) -> Result<()> {
    if let Some(seed) = args.seed {
        cfg.sim.seed = seed;
    }
    if let Some(v) = args.eps1 {
        cfg.scenario.eps1 = v;
    }
    if let Some(v) = args.rho_eps {
        cfg.scenario.rho_eps = v;
    }
    if let Some(v) = args.eta1 {
        cfg.scenario.eta1 = v;
    }
    if let Some(v) = args.rho_eta {
        cfg.scenario.rho_eta = v;
    }

    let path = match args.model {
        Model::Behavioral => simulate_behavioral(&cfg.params, &cfg.scenario, &cfg.sim)?,
        Model::Rational => simulate_rational(&cfg.params, &cfg.scenario, &cfg.sim)?,
    };

    let out_dir = ensure_out_dir(&cfg)?;
    let csv_path = args
        .out
        .unwrap_or_else(|| out_dir.join(format!("sim_{:?}.csv", args.model).to_lowercase()));
    write_sim_csv(&path, std::fs::File::create(&csv_path)?)?;

    let (yw, pw) = extract_window(&path, cfg.scenario.t0, cfg.sim.window_len)?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!(
        "{:?} simulation: {} periods, window [{}, {})",
        args.model,
        path.len(),
        cfg.scenario.t0,
        cfg.scenario.t0 + cfg.sim.window_len
    );
    println!("window mean output gap = {:+.4}", mean(&yw));
    println!("window mean inflation  = {:+.4}", mean(&pw));
    let mut report = Report::new("simulation");
    report
        .push_str("model", format!("{:?}", args.model).to_lowercase())
        .push_usize("periods", path.len())
        .push_f64("window_mean_y", mean(&yw))
        .push_f64("window_mean_pi", mean(&pw));
    if let Ok(m) = moments(&yw) {
        report
            .push_f64("window_var_y", m.variance)
            .push_f64("window_skew_y", m.skewness)
            .push_f64("window_kurt_y", m.kurtosis);
    }
    if let Ok(m) = moments(&pw) {
        report
            .push_f64("window_var_pi", m.variance)
            .push_f64("window_skew_pi", m.skewness)
            .push_f64("window_kurt_pi", m.kurtosis);
    }
    let rpt_path = out_dir.join(format!("sim_{:?}.json", args.model).to_lowercase());
    write_report(&report, &rpt_path)?;
    println!("path -> {}", csv_path.display());
    println!("report -> {}", rpt_path.display());
    Ok(())
}
