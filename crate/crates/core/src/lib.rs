//! Simulation and calibration toolkit for a three-equation behavioral New
//! Keynesian model of a large pandemic shock and vaccination recovery.
//!
//! The crate covers the full pipeline:
//!
//! - [`data`]: FRED-format quarterly CSV ingestion, CPI rebasing,
//!   quarter-on-quarter inflation, COVID evaluation windows
//! - [`filters`]: HP and local-linear-trend Kalman output gaps
//! - [`stats`]: moments, Jarque-Bera, structural-break ANOVA, Mahalanobis
//!   distances (two-observation and paired-series covariances)
//! - [`model`]: structural parameters and the period solver for the
//!   aggregate demand / supply / Taylor-rule system
//! - [`expectations`]: fundamentalist/extrapolator switching
//! - [`rational`]: the undetermined-coefficients rational decision rule
//! - [`simulate`]: behavioral and rational paths with shock scenarios
//! - [`calibrate`]: grid search over shock parameters with checkpointing

pub mod calibrate;
pub mod data;
pub mod error;
pub mod expectations;
pub mod filters;
pub mod model;
pub mod quarter;
pub mod rational;
pub mod report;
pub mod simulate;
pub mod stats;

pub use error::{CoreError, Result};
pub use quarter::Quarter;
