pub mod break_cmd;
pub mod calibrate_cmd;
pub mod gap_cmd;
pub mod report_cmd;
pub mod robustness_cmd;
pub mod simulate_cmd;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use nksim_core::data::{covid_window, parse_fred_csv_file, qoq_inflation, rebase, QuarterlySeries};
use nksim_core::filters::{hp_gap_series, kalman_gap_series};
use nksim_core::report::Report;

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FilterKind {
    Hp,
    Kalman,
}

impl std::fmt::Display for FilterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FilterKind::Hp => write!(f, "hp"),
            FilterKind::Kalman => write!(f, "kalman"),
        }
    }
}

/// Pinned initial demand shock for each filter's measured Q1 2020 dip.
pub fn pinned_eps1(filter: FilterKind) -> f64 {
    match filter {
        FilterKind::Hp => -0.27,
        FilterKind::Kalman => -0.18,
    }
}

pub fn load_log_gdp(cfg: &RunConfig) -> Result<QuarterlySeries> {
    let gdp = parse_fred_csv_file(&cfg.data.gdp_csv)
        .with_context(|| format!("loading GDP csv {}", cfg.data.gdp_csv.display()))?;
    Ok(gdp.ln("log_gdp")?)
}

pub fn gap_series(cfg: &RunConfig, filter: FilterKind) -> Result<QuarterlySeries> {
    let log_gdp = load_log_gdp(cfg)?;
    let gap = match filter {
        FilterKind::Hp => hp_gap_series(&log_gdp, cfg.data.hp_lambda)?,
        FilterKind::Kalman => kalman_gap_series(&log_gdp, &cfg.data.kalman_spec())?,
    };
    Ok(gap)
}

pub fn inflation_series(cfg: &RunConfig) -> Result<QuarterlySeries> {
    let cpi = parse_fred_csv_file(&cfg.data.cpi_csv)
        .with_context(|| format!("loading CPI csv {}", cfg.data.cpi_csv.display()))?;
    let anchor = cfg.data.base_quarter.parse()?;
    Ok(qoq_inflation(&rebase(&cpi, anchor)?)?)
}

/// Empirical evaluation windows and their means for one filter choice.
pub struct DataTargets {
    pub gap_window: QuarterlySeries,
    pub infl_window: QuarterlySeries,
    pub means: [f64; 2],
}

pub fn data_targets(cfg: &RunConfig, filter: FilterKind) -> Result<DataTargets> {
    let gap = gap_series(cfg, filter)?;
    let infl = inflation_series(cfg)?;
    let gap_window = covid_window(&gap, cfg.data.window_len)?;
    let infl_window = covid_window(&infl, cfg.data.window_len)?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let means = [mean(&gap_window.values), mean(&infl_window.values)];
    Ok(DataTargets { gap_window, infl_window, means })
}

pub fn ensure_out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.output.dir)
        .with_context(|| format!("creating output dir {}", cfg.output.dir.display()))?;
    Ok(cfg.output.dir.clone())
}

pub fn write_report(report: &Report, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)
        .with_context(|| format!("writing report {}", path.display()))?;
    report.write_json(f)?;
    Ok(())
}
