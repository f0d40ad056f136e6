//! T-period simulations of the behavioral and rational economies with
//! injected demand/supply shock paths and optional stochastic background
//! innovations, plus evaluation-window extraction.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::expectations::{behavioral_forecasts, ForecasterState};
use crate::model::{compute_kappa, solve_period, StructuralParams};
use crate::rational::solve_re_rule;

/// Deterministic COVID demand shock and vaccination supply shock.
///
/// The demand window is `[t0, t0 + demand_quarters)`; the supply window is
/// `[t0 + supply_offset, t0 + supply_offset + supply_quarters)`. Decay is
/// `rho^(t - window_start)` with the convention `rho^0 = 1` even at rho = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShockScenario {
    /// Initial demand shock (log units, negative for the COVID crash).
    pub eps1: f64,
    /// Demand persistence, in [0, 1].
    pub rho_eps: f64,
    pub demand_quarters: usize,
    /// Initial supply shock (percent units, >= 0 for vaccination).
    pub eta1: f64,
    /// Supply persistence, in [0, 1].
    pub rho_eta: f64,
    /// Quarters after t0 when the supply shock begins.
    pub supply_offset: usize,
    pub supply_quarters: usize,
    /// Insertion period within the long simulation (0-based).
    pub t0: usize,
}

impl Default for ShockScenario {
    fn default() -> Self {
        ShockScenario {
            eps1: -0.27,
            rho_eps: 0.8,
            demand_quarters: 10,
            eta1: 0.64,
            rho_eta: 0.9,
            supply_offset: 4,
            supply_quarters: 6,
            t0: 1000,
        }
    }
}

impl ShockScenario {
    pub fn validate(&self, total_periods: usize) -> Result<()> {
        for (name, rho) in [("rho_eps", self.rho_eps), ("rho_eta", self.rho_eta)] {
            if !(0.0..=1.0).contains(&rho) {
                return Err(CoreError::InvalidParameter(format!("{name} must be in [0,1]")));
            }
        }
        if !self.eps1.is_finite() || !self.eta1.is_finite() {
            return Err(CoreError::InvalidParameter("shock sizes must be finite".into()));
        }
        let demand_end = self.t0 + self.demand_quarters;
        let supply_end = self.t0 + self.supply_offset + self.supply_quarters;
        if demand_end > total_periods || supply_end > total_periods {
            return Err(CoreError::WindowOutOfRange(format!(
                "shock windows end at {} but simulation has {} periods",
                demand_end.max(supply_end),
                total_periods
            )));
        }
        Ok(())
    }
}

/// Background-innovation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    None,
    White,
    Ar1,
}

/// Simulation length, evaluation window and noise configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Total simulated periods.
    pub periods: usize,
    /// Evaluation window length.
    pub window_len: usize,
    pub seed: u64,
    pub noise_mode: NoiseMode,
    /// Demand-equation innovation standard deviation (log units).
    pub noise_sd_demand: f64,
    /// Supply-equation innovation standard deviation (percent units).
    pub noise_sd_supply: f64,
    /// AR(1) coefficient for `NoiseMode::Ar1`.
    pub noise_rho: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            periods: 2000,
            window_len: 16,
            seed: 20240401,
            noise_mode: NoiseMode::White,
            noise_sd_demand: 0.01,
            noise_sd_supply: 0.1,
            noise_rho: 0.95,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, scenario: &ShockScenario) -> Result<()> {
        if self.periods == 0 {
            return Err(CoreError::InvalidParameter("periods must be > 0".into()));
        }
        if scenario.t0 + self.window_len > self.periods {
            return Err(CoreError::WindowOutOfRange(format!(
                "t0 + window_len = {} exceeds total periods {}",
                scenario.t0 + self.window_len,
                self.periods
            )));
        }
        if self.noise_sd_demand < 0.0 || self.noise_sd_supply < 0.0 {
            return Err(CoreError::InvalidParameter("noise sd must be >= 0".into()));
        }
        if matches!(self.noise_mode, NoiseMode::Ar1) && !(0.0..1.0).contains(&self.noise_rho) {
            return Err(CoreError::InvalidParameter("noise_rho must be in [0,1)".into()));
        }
        scenario.validate(self.periods)
    }
}

/// Simulated time series. Fraction arrays are present for the behavioral
/// model only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPath {
    pub y: Vec<f64>,
    pub pi: Vec<f64>,
    pub i: Vec<f64>,
    pub alpha_y: Option<Vec<f64>>,
    pub alpha_pi: Option<Vec<f64>>,
    pub eps: Vec<f64>,
    pub eta: Vec<f64>,
}

impl SimPath {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Deterministic scenario shock paths over `total` periods.
pub fn shock_path(s: &ShockScenario, total: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    s.validate(total)?;
    let mut eps = vec![0.0; total];
    let mut eta = vec![0.0; total];
    for k in 0..s.demand_quarters {
        // rho^0 = 1 by convention even when rho = 0
        eps[s.t0 + k] = if k == 0 { s.eps1 } else { s.rho_eps.powi(k as i32) * s.eps1 };
    }
    let sup0 = s.t0 + s.supply_offset;
    for k in 0..s.supply_quarters {
        eta[sup0 + k] = if k == 0 { s.eta1 } else { s.rho_eta.powi(k as i32) * s.eta1 };
    }
    Ok((eps, eta))
}

/// Per-run noise generator with a fixed draw order (demand, then supply,
/// each period), so paths are bit-reproducible for a given seed.
struct NoiseGen {
    rng: ChaCha8Rng,
    mode: NoiseMode,
    sd_demand: f64,
    sd_supply: f64,
    rho: f64,
    state_demand: f64,
    state_supply: f64,
}

impl NoiseGen {
    fn new(cfg: &SimConfig) -> Self {
        NoiseGen {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            mode: cfg.noise_mode,
            sd_demand: cfg.noise_sd_demand,
            sd_supply: cfg.noise_sd_supply,
            rho: cfg.noise_rho,
            state_demand: 0.0,
            state_supply: 0.0,
        }
    }

    fn draw(&mut self) -> (f64, f64) {
        match self.mode {
            NoiseMode::None => (0.0, 0.0),
            NoiseMode::White => {
                let d: f64 = self.rng.sample(StandardNormal);
                let s: f64 = self.rng.sample(StandardNormal);
                (d * self.sd_demand, s * self.sd_supply)
            }
            NoiseMode::Ar1 => {
                let d: f64 = self.rng.sample(StandardNormal);
                let s: f64 = self.rng.sample(StandardNormal);
                self.state_demand = self.rho * self.state_demand + d * self.sd_demand;
                self.state_supply = self.rho * self.state_supply + s * self.sd_supply;
                (self.state_demand, self.state_supply)
            }
        }
    }
}

/// Behavioral simulation over the full configured horizon.
pub fn simulate_behavioral(
    p: &StructuralParams,
    s: &ShockScenario,
    cfg: &SimConfig,
) -> Result<SimPath> {
    simulate_behavioral_horizon(p, s, cfg, cfg.periods)
}

/// Behavioral simulation truncated after `horizon` periods. The recursion is
/// strictly forward-looking in computed state (expectations use realized
/// lags only), so the result equals the first `horizon` entries of the full
/// path; calibration uses this to stop right after the evaluation window.
pub fn simulate_behavioral_horizon(
    p: &StructuralParams,
    s: &ShockScenario,
    cfg: &SimConfig,
    horizon: usize,
) -> Result<SimPath> {
    p.validate()?;
    cfg.validate(s)?;
    let horizon = horizon.min(cfg.periods);
    let kappa = compute_kappa(p)?;
    let (eps_det, eta_det) = shock_path(s, cfg.periods)?;
    let mut noise = NoiseGen::new(cfg);

    let mut state = ForecasterState::default();
    let mut path = SimPath {
        y: Vec::with_capacity(horizon),
        pi: Vec::with_capacity(horizon),
        i: Vec::with_capacity(horizon),
        alpha_y: Some(Vec::with_capacity(horizon)),
        alpha_pi: Some(Vec::with_capacity(horizon)),
        eps: Vec::with_capacity(horizon),
        eta: Vec::with_capacity(horizon),
    };
    let mut y_prev = 0.0;
    let mut pi_prev = 0.0;
    let mut i_prev = 0.0;
    for t in 0..horizon {
        // 1-3: score two-lag forecasts, switch fractions, form expectations
        let (f_y_fund, f_y_ext, f_pi_fund, f_pi_ext) = behavioral_forecasts(y_prev, pi_prev, p);
        let e_y = state.output.step(y_prev, f_y_fund, f_y_ext, p.gamma, p.rho_mem);
        let e_pi = state
            .inflation
            .step(pi_prev, f_pi_fund, f_pi_ext, p.gamma, p.rho_mem);
        // 4: shocks
        let (nd, ns) = noise.draw();
        let eps = eps_det[t] + nd;
        let eta = eta_det[t] + ns;
        // 5: solve the period
        let st = solve_period(e_y, e_pi, eps, eta, i_prev, p, kappa)?;
        path.y.push(st.y);
        path.pi.push(st.pi);
        path.i.push(st.i);
        path.alpha_y.as_mut().unwrap().push(state.output.alpha_fund);
        path.alpha_pi.as_mut().unwrap().push(state.inflation.alpha_fund);
        path.eps.push(eps);
        path.eta.push(eta);
        y_prev = st.y;
        pi_prev = st.pi;
        i_prev = st.i;
    }
    Ok(path)
}

/// Rational simulation over the full configured horizon.
pub fn simulate_rational(
    p: &StructuralParams,
    s: &ShockScenario,
    cfg: &SimConfig,
) -> Result<SimPath> {
    simulate_rational_horizon(p, s, cfg, cfg.periods)
}

/// Rational simulation truncated after `horizon` periods (see the behavioral
/// variant for the prefix property).
pub fn simulate_rational_horizon(
    p: &StructuralParams,
    s: &ShockScenario,
    cfg: &SimConfig,
    horizon: usize,
) -> Result<SimPath> {
    p.validate()?;
    cfg.validate(s)?;
    let horizon = horizon.min(cfg.periods);
    let kappa = compute_kappa(p)?;
    let rule = solve_re_rule(p, kappa, s.rho_eps, s.rho_eta)?;
    let (eps_det, eta_det) = shock_path(s, cfg.periods)?;
    let mut noise = NoiseGen::new(cfg);

    let mut path = SimPath {
        y: Vec::with_capacity(horizon),
        pi: Vec::with_capacity(horizon),
        i: Vec::with_capacity(horizon),
        alpha_y: None,
        alpha_pi: None,
        eps: Vec::with_capacity(horizon),
        eta: Vec::with_capacity(horizon),
    };
    let mut x = Vector3::zeros();
    for t in 0..horizon {
        let (nd, ns) = noise.draw();
        let eps = eps_det[t] + nd;
        let eta = eta_det[t] + ns;
        x = rule.step(&x, eps, eta);
        path.y.push(x[0]);
        path.pi.push(x[1]);
        path.i.push(x[2]);
        path.eps.push(eps);
        path.eta.push(eta);
    }
    Ok(path)
}

/// Contiguous evaluation window starting at `t0`.
pub fn extract_window(path: &SimPath, t0: usize, len: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if t0 + len > path.len() {
        return Err(CoreError::WindowOutOfRange(format!(
            "window {}..{} exceeds path length {}",
            t0,
            t0 + len,
            path.len()
        )));
    }
    Ok((path.y[t0..t0 + len].to_vec(), path.pi[t0..t0 + len].to_vec()))
}

/// Write a simulated path as CSV with columns
/// `t,y,pi,i,alpha_y,alpha_pi,eps,eta` (alphas blank for rational paths).
pub fn write_sim_csv(path: &SimPath, w: impl std::io::Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["t", "y", "pi", "i", "alpha_y", "alpha_pi", "eps", "eta"])
        .map_err(|e| CoreError::Series(e.to_string()))?;
    for t in 0..path.len() {
        let ay = path.alpha_y.as_ref().map(|v| format!("{:.12e}", v[t])).unwrap_or_default();
        let ap = path.alpha_pi.as_ref().map(|v| format!("{:.12e}", v[t])).unwrap_or_default();
        wtr.write_record([
            t.to_string(),
            format!("{:.12e}", path.y[t]),
            format!("{:.12e}", path.pi[t]),
            format!("{:.12e}", path.i[t]),
            ay,
            ap,
            format!("{:.12e}", path.eps[t]),
            format!("{:.12e}", path.eta[t]),
        ])
        .map_err(|e| CoreError::Series(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet_cfg(periods: usize) -> SimConfig {
        SimConfig {
            periods,
            noise_mode: NoiseMode::None,
            ..SimConfig::default()
        }
    }

    fn small_scenario() -> ShockScenario {
        ShockScenario { t0: 10, ..ShockScenario::default() }
    }

    #[test]
    fn shock_path_decay_and_cutoff() {
        let s = ShockScenario { t0: 5, ..ShockScenario::default() };
        let (eps, eta) = shock_path(&s, 40).unwrap();
        assert!((eps[5] + 0.27).abs() < 1e-15);
        // second active quarter: -0.27 * 0.8 = -0.216
        assert!((eps[6] + 0.216).abs() < 1e-15);
        // dead after 10 quarters
        assert_eq!(eps[15], 0.0);
        assert!(eps[4] == 0.0);
        // supply window starts at offset 4 and runs 6 quarters
        assert!((eta[9] - 0.64).abs() < 1e-15);
        assert!((eta[10] - 0.64 * 0.9).abs() < 1e-15);
        assert_eq!(eta[15], 0.0);
        // both default windows end together at t0 + 9
        assert!(eps[14] != 0.0 && eta[14] != 0.0);
    }

    #[test]
    fn zero_persistence_is_single_impulse() {
        let s = ShockScenario {
            rho_eps: 0.0,
            t0: 3,
            ..ShockScenario::default()
        };
        let (eps, _) = shock_path(&s, 30).unwrap();
        assert!((eps[3] + 0.27).abs() < 1e-15);
        for v in &eps[4..30] {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn window_overflow_is_config_error() {
        let s = ShockScenario { t0: 95, ..ShockScenario::default() };
        assert!(matches!(shock_path(&s, 100), Err(CoreError::WindowOutOfRange(_))));
    }

    #[test]
    fn behavioral_zero_shocks_stay_at_steady_state() {
        let p = StructuralParams::default();
        let s = ShockScenario {
            eps1: 0.0,
            eta1: 0.0,
            t0: 10,
            ..ShockScenario::default()
        };
        let path = simulate_behavioral(&p, &s, &quiet_cfg(100)).unwrap();
        assert!(path.y.iter().all(|v| *v == 0.0));
        assert!(path.pi.iter().all(|v| *v == 0.0));
        assert!(path.alpha_y.as_ref().unwrap().iter().all(|a| *a == 0.5));
    }

    #[test]
    fn behavioral_is_bit_deterministic() {
        let p = StructuralParams::default();
        let s = small_scenario();
        let cfg = SimConfig { periods: 120, seed: 777, ..SimConfig::default() };
        let a = simulate_behavioral(&p, &s, &cfg).unwrap();
        let b = simulate_behavioral(&p, &s, &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate_behavioral(&p, &s, &SimConfig { seed: 778, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn horizon_prefix_matches_full_run() {
        let p = StructuralParams::default();
        let s = small_scenario();
        let cfg = SimConfig { periods: 300, seed: 31, ..SimConfig::default() };
        let full = simulate_behavioral(&p, &s, &cfg).unwrap();
        let prefix = simulate_behavioral_horizon(&p, &s, &cfg, 40).unwrap();
        assert_eq!(prefix.len(), 40);
        assert_eq!(&full.y[..40], &prefix.y[..]);
        assert_eq!(&full.pi[..40], &prefix.pi[..]);

        let full_r = simulate_rational(&p, &s, &cfg).unwrap();
        let pre_r = simulate_rational_horizon(&p, &s, &cfg, 40).unwrap();
        assert_eq!(&full_r.y[..40], &pre_r.y[..]);
    }

    #[test]
    fn rational_zero_everything_is_zero() {
        let p = StructuralParams::default();
        let s = ShockScenario {
            eps1: 0.0,
            eta1: 0.0,
            t0: 10,
            ..ShockScenario::default()
        };
        let path = simulate_rational(&p, &s, &quiet_cfg(80)).unwrap();
        assert!(path.y.iter().all(|v| *v == 0.0));
        assert!(path.alpha_y.is_none());
    }

    #[test]
    fn rational_superposition_is_exact() {
        let p = StructuralParams::default();
        let demand_only = ShockScenario { eta1: 0.0, t0: 10, ..ShockScenario::default() };
        let supply_only = ShockScenario { eps1: 0.0, t0: 10, ..ShockScenario::default() };
        let both = ShockScenario { t0: 10, ..ShockScenario::default() };
        let cfg = quiet_cfg(120);
        let a = simulate_rational(&p, &demand_only, &cfg).unwrap();
        let b = simulate_rational(&p, &supply_only, &cfg).unwrap();
        let c = simulate_rational(&p, &both, &cfg).unwrap();
        for t in 0..c.len() {
            assert!((c.y[t] - a.y[t] - b.y[t]).abs() < 1e-10);
            assert!((c.pi[t] - a.pi[t] - b.pi[t]).abs() < 1e-10);
            assert!((c.i[t] - a.i[t] - b.i[t]).abs() < 1e-10);
        }
    }

    #[test]
    fn rational_rate_decays_after_impulse() {
        // single demand impulse with smoothing: the policy rate decays
        // geometrically once shocks die
        let p = StructuralParams::default();
        let s = ShockScenario {
            rho_eps: 0.0,
            eta1: 0.0,
            t0: 5,
            ..ShockScenario::default()
        };
        let path = simulate_rational(&p, &s, &quiet_cfg(80)).unwrap();
        for t in 10..60 {
            assert!(path.i[t].abs() <= path.i[t - 1].abs() + 1e-15);
        }
        assert!(path.i[20].abs() > 0.0);
    }

    #[test]
    fn behavioral_fractions_stay_in_bounds_across_seeds() {
        let p = StructuralParams::default();
        let s = ShockScenario::default();
        for seed in 0..100 {
            let cfg = SimConfig { periods: 2000, seed, ..SimConfig::default() };
            let path = simulate_behavioral(&p, &s, &cfg).unwrap();
            for a in path.alpha_y.as_ref().unwrap().iter().chain(path.alpha_pi.as_ref().unwrap()) {
                assert!(a.is_finite());
                assert!((0.0..=1.0).contains(a));
            }
            assert!(path.y.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn extract_window_bounds() {
        let p = StructuralParams::default();
        let s = small_scenario();
        let path = simulate_behavioral(&p, &s, &quiet_cfg(64)).unwrap();
        let (y, pi) = extract_window(&path, 10, 16).unwrap();
        assert_eq!(y.len(), 16);
        assert_eq!(pi.len(), 16);
        assert!(extract_window(&path, 48, 16).is_ok());
        assert!(extract_window(&path, 49, 16).is_err());
    }

    #[test]
    fn degenerate_behavioral_matches_rational_at_rest() {
        // with zero shocks both regimes sit identically at the steady state,
        // the degenerate case in which the two models coincide
        let p = StructuralParams { gamma: 1e9, ..StructuralParams::default() };
        let s = ShockScenario { eps1: 0.0, eta1: 0.0, t0: 5, ..ShockScenario::default() };
        let cfg = quiet_cfg(50);
        let b = simulate_behavioral(&p, &s, &cfg).unwrap();
        let r = simulate_rational(&p, &s, &cfg).unwrap();
        assert_eq!(b.y, r.y);
        assert_eq!(b.pi, r.pi);
    }

    #[test]
    fn sim_csv_has_expected_columns() {
        let p = StructuralParams::default();
        let s = small_scenario();
        let path = simulate_behavioral(&p, &s, &quiet_cfg(30)).unwrap();
        let mut buf = Vec::new();
        write_sim_csv(&path, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,y,pi,i,alpha_y,alpha_pi,eps,eta");
        assert_eq!(text.lines().count(), 31);
    }
}
