//! Behavioral expectation formation: fundamentalists versus extrapolators
//! with discrete-choice switching driven by discounted squared forecast
//! errors.
//!
//! Timing: the forecast made in period t targets the period t+1 outcome, so
//! the error that can be scored in period t compares the t-1 realization
//! with the forecast issued in t-2. Each rule therefore keeps its last two
//! forecasts in the state.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::StructuralParams;

/// Per-rule forecast bookkeeping for one variable (output gap or inflation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleTrack {
    /// Discounted utility of the fundamentalist rule (always <= 0).
    pub u_fund: f64,
    /// Discounted utility of the extrapolator rule (always <= 0).
    pub u_ext: f64,
    /// Fraction of fundamentalists, in [0, 1].
    pub alpha_fund: f64,
    /// Fundamentalist forecasts issued one and two periods ago.
    pub fund_hist: [f64; 2],
    /// Extrapolator forecasts issued one and two periods ago.
    pub ext_hist: [f64; 2],
}

impl Default for RuleTrack {
    fn default() -> Self {
        RuleTrack {
            u_fund: 0.0,
            u_ext: 0.0,
            alpha_fund: 0.5,
            fund_hist: [0.0; 2],
            ext_hist: [0.0; 2],
        }
    }
}

/// Forecaster state for both expectation channels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ForecasterState {
    pub output: RuleTrack,
    pub inflation: RuleTrack,
}

/// Recursive form of the geometrically discounted utility
/// `U_t = rho U_{t-1} - (1-rho) (realized - forecast)^2`; equals the
/// infinite weighted sum of past squared errors with weights (1-rho) rho^k.
pub fn update_utility(prev_utility: f64, realized: f64, forecast_two_lags: f64, rho_mem: f64) -> f64 {
    let err = realized - forecast_two_lags;
    rho_mem * prev_utility - (1.0 - rho_mem) * err * err
}

/// Logit choice fractions, overflow-safe through max subtraction.
pub fn switching_fractions(u_fund: f64, u_ext: f64, gamma: f64) -> (f64, f64) {
    let a = gamma * u_fund;
    let b = gamma * u_ext;
    let m = a.max(b);
    let ea = (a - m).exp();
    let eb = (b - m).exp();
    let alpha_fund = ea / (ea + eb);
    (alpha_fund, 1.0 - alpha_fund)
}

/// Rule forecasts of the next-period output gap and inflation, using only
/// the last observed values (period-t outcomes are simultaneous with the
/// expectations, so extrapolators carry y_{t-1} and pi_{t-1} forward).
pub fn behavioral_forecasts(
    y_prev: f64,
    pi_prev: f64,
    p: &StructuralParams,
) -> (f64, f64, f64, f64) {
    let f_y_fund = 0.0;
    let f_y_ext = y_prev;
    let f_pi_fund = p.pi_target;
    let f_pi_ext = pi_prev;
    (f_y_fund, f_y_ext, f_pi_fund, f_pi_ext)
}

/// Convex combination of rule forecasts.
pub fn aggregate_expectation(alpha_fund: f64, f_fund: f64, f_ext: f64) -> f64 {
    alpha_fund * f_fund + (1.0 - alpha_fund) * f_ext
}

impl RuleTrack {
    /// One behavioral step for this channel: score the two-lag-old forecasts
    /// against the latest realization, refresh the switching fraction, then
    /// issue and record the next-period forecasts. Returns the aggregate
    /// expectation.
    pub fn step(
        &mut self,
        realized_prev: f64,
        f_fund_new: f64,
        f_ext_new: f64,
        gamma: f64,
        rho_mem: f64,
    ) -> f64 {
        self.u_fund = update_utility(self.u_fund, realized_prev, self.fund_hist[1], rho_mem);
        self.u_ext = update_utility(self.u_ext, realized_prev, self.ext_hist[1], rho_mem);
        let (af, _) = switching_fractions(self.u_fund, self.u_ext, gamma);
        self.alpha_fund = af;
        let agg = aggregate_expectation(af, f_fund_new, f_ext_new);
        self.fund_hist = [f_fund_new, self.fund_hist[0]];
        self.ext_hist = [f_ext_new, self.ext_hist[0]];
        agg
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha_fund) {
            return Err(CoreError::InvalidInput("alpha_fund out of [0,1]".into()));
        }
        if self.u_fund > 0.0 || self.u_ext > 0.0 {
            return Err(CoreError::InvalidInput("utilities must be <= 0".into()));
        }
        Ok(())
    }
}
