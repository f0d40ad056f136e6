//! TOML run configuration. Every field defaults to the reference pipeline
//! values, so an empty (or absent) file reproduces the full default run;
//! unknown keys are rejected.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use nksim_core::calibrate::GridSpec;
use nksim_core::model::StructuralParams;
use nksim_core::simulate::{ShockScenario, SimConfig};
use nksim_core::stats::MahalanobisSpec;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: StructuralParams,
    pub scenario: ShockScenario,
    pub sim: SimConfig,
    pub grid: GridSpec,
    pub mahalanobis: MahalanobisConfig,
    pub data: DataConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MahalanobisConfig {
    pub strategy: String,
    pub pinv_tolerance: f64,
}

impl Default for MahalanobisConfig {
    fn default() -> Self {
        MahalanobisConfig { strategy: "paper_two_obs".into(), pinv_tolerance: 1e-12 }
    }
}

impl MahalanobisConfig {
    pub fn to_spec(&self) -> Result<MahalanobisSpec> {
        let strategy = match self.strategy.as_str() {
            "paper_two_obs" => nksim_core::stats::MahalanobisStrategy::PaperTwoObs,
            "paired_series" => nksim_core::stats::MahalanobisStrategy::PairedSeries,
            other => anyhow::bail!("unknown mahalanobis strategy {other:?}"),
        };
        Ok(MahalanobisSpec { strategy, pinv_tolerance: self.pinv_tolerance })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub gdp_csv: PathBuf,
    pub cpi_csv: PathBuf,
    /// CPI rebasing anchor.
    pub base_quarter: String,
    /// Evaluation window length in quarters (16 or 17).
    pub window_len: usize,
    /// HP smoothing parameter.
    pub hp_lambda: f64,
    /// Kalman measurement variance V.
    pub kalman_v: f64,
    /// Kalman process covariance diagonal (level, growth).
    pub kalman_w: [f64; 2],
    /// Kalman initial covariance diagonal (level, growth).
    pub kalman_c0: [f64; 2],
}

impl Default for DataConfig {
    fn default() -> Self {
        let q = 0.06 * 0.06;
        DataConfig {
            gdp_csv: PathBuf::from("data/india_gdp_q.csv"),
            cpi_csv: PathBuf::from("data/india_cpi_q.csv"),
            base_quarter: "2011Q4".into(),
            window_len: 16,
            hp_lambda: 1600.0,
            kalman_v: q,
            kalman_w: [q, q],
            kalman_c0: [q, q],
        }
    }
}

impl DataConfig {
    pub fn kalman_spec(&self) -> nksim_core::filters::KalmanSpec {
        nksim_core::filters::KalmanSpec {
            v: self.kalman_v,
            w: [[self.kalman_w[0], 0.0], [0.0, self.kalman_w[1]]],
            c0: [[self.kalman_c0[0], 0.0], [0.0, self.kalman_c0[1]]],
            ..nksim_core::filters::KalmanSpec::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

impl RunConfig {
    /// Load a config file, or defaults when `path` is `None`. The output
    /// directory may be overridden by the `NKSIM_OUT_DIR` variable.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg: RunConfig = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => RunConfig::default(),
        };
        if let Ok(dir) = std::env::var("NKSIM_OUT_DIR") {
            if !dir.is_empty() {
                cfg.output.dir = PathBuf::from(dir);
            }
        }
        Ok(cfg)
    }
}
