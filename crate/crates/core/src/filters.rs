//! Trend-cycle decomposition: the Hodrick-Prescott filter and a two-state
//! (level, growth) local-linear-trend Kalman filter, both producing
//! output-gap series from log real GDP.

use nalgebra::{Matrix2, RowVector2, Vector2};
use serde::{Deserialize, Serialize};

use crate::data::QuarterlySeries;
use crate::error::{CoreError, Result};

/// HP filter with smoothing parameter `lambda` (1600 for quarterly data).
///
/// The trend solves the pentadiagonal system `(I + lambda * D'D) t = z`
/// where `D` is the second-difference operator; the cycle is `z - t`.
/// The first-order condition implies the cycle sums to zero exactly.
pub fn hp_filter(z: &[f64], lambda: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = z.len();
    if n < 4 {
        return Err(CoreError::InvalidInput(format!(
            "hp_filter needs at least 4 observations, got {n}"
        )));
    }
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(CoreError::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::InvalidInput("hp_filter input must be finite".into()));
    }

    // Assemble the symmetric pentadiagonal A = I + lambda * D'D as three bands
    // (d0 = main diagonal, d1/d2 = first/second super-diagonal) straight from
    // the [1, -2, 1] stencil of each D row.
    let mut d0 = vec![0.0; n];
    let mut d1 = vec![0.0; n - 1];
    let d2 = vec![lambda; n - 2]; // row i contributes (1)(1) at (i, i+2)
    for (i, v) in d0.iter_mut().enumerate() {
        *v = 1.0;
        if i >= 2 {
            *v += lambda; // row i-2 contributes weight 1 at column i
        }
        if i >= 1 && i + 1 < n {
            *v += 4.0 * lambda; // row i-1 contributes weight -2
        }
        if i + 2 < n {
            *v += lambda; // row i contributes weight 1
        }
    }
    for (i, v) in d1.iter_mut().enumerate() {
        if i >= 1 {
            *v += -2.0 * lambda; // row i-1: (-2)(1)
        }
        if i + 2 < n {
            *v += -2.0 * lambda; // row i: (1)(-2)
        }
    }

    let trend = solve_pentadiagonal(&d0, &d1, &d2, z)?;
    let cycle: Vec<f64> = z.iter().zip(&trend).map(|(a, b)| a - b).collect();
    Ok((trend, cycle))
}

/// Cholesky factorization and solve for a symmetric positive-definite
/// pentadiagonal system given by its diagonal and two super-diagonals.
fn solve_pentadiagonal(d0: &[f64], d1: &[f64], d2: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = d0.len();
    // L has main diagonal l0 and two sub-diagonals l1, l2 (banded Cholesky).
    let mut l0 = vec![0.0; n];
    let mut l1 = vec![0.0; n]; // l1[i] = L[i, i-1]
    let mut l2 = vec![0.0; n]; // l2[i] = L[i, i-2]
    for i in 0..n {
        let a_ii2 = if i >= 2 { d2[i - 2] } else { 0.0 };
        let a_ii1 = if i >= 1 { d1[i - 1] } else { 0.0 };
        if i >= 2 {
            l2[i] = a_ii2 / l0[i - 2];
        }
        if i >= 1 {
            let cross = if i >= 2 { l2[i] * l1[i - 1] } else { 0.0 };
            l1[i] = (a_ii1 - cross) / l0[i - 1];
        }
        let sq = d0[i] - l1[i] * l1[i] - l2[i] * l2[i];
        if sq <= 0.0 {
            return Err(CoreError::DegenerateParameters(
                "HP system lost positive definiteness".into(),
            ));
        }
        l0[i] = sq.sqrt();
    }
    // forward substitution L y = rhs
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = rhs[i];
        if i >= 1 {
            s -= l1[i] * y[i - 1];
        }
        if i >= 2 {
            s -= l2[i] * y[i - 2];
        }
        y[i] = s / l0[i];
    }
    // back substitution L' x = y
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        if i + 1 < n {
            s -= l1[i + 1] * x[i + 1];
        }
        if i + 2 < n {
            s -= l2[i + 2] * x[i + 2];
        }
        x[i] = s / l0[i];
    }
    Ok(x)
}

/// Local-linear-trend state space driving the Kalman output gap.
///
/// State s = (level, growth) with level' = level + growth; the measurement
/// row is `[1, 1]`, so observed log GDP loads on level plus growth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KalmanSpec {
    /// Measurement row F (1x2).
    pub f: [f64; 2],
    /// Transition matrix G (2x2, row-major).
    pub g: [[f64; 2]; 2],
    /// Measurement variance V.
    pub v: f64,
    /// Process covariance W (2x2, row-major).
    pub w: [[f64; 2]; 2],
    /// Initial covariance C0 (2x2, row-major).
    pub c0: [[f64; 2]; 2],
}

impl Default for KalmanSpec {
    fn default() -> Self {
        let q = 0.06 * 0.06;
        KalmanSpec {
            f: [1.0, 1.0],
            g: [[1.0, 1.0], [0.0, 1.0]],
            v: q,
            w: [[q, 0.0], [0.0, q]],
            c0: [[q, 0.0], [0.0, q]],
        }
    }
}

impl KalmanSpec {
    fn validate(&self) -> Result<()> {
        if !self.v.is_finite() || self.v <= 0.0 {
            return Err(CoreError::InvalidParameter(format!(
                "measurement variance must be > 0, got {}",
                self.v
            )));
        }
        for (name, m) in [("W", &self.w), ("C0", &self.c0)] {
            if (m[0][1] - m[1][0]).abs() > 1e-12 {
                return Err(CoreError::InvalidParameter(format!("{name} must be symmetric")));
            }
            // 2x2 PSD: nonnegative diagonal and determinant
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if m[0][0] < 0.0 || m[1][1] < 0.0 || det < -1e-15 {
                return Err(CoreError::InvalidParameter(format!(
                    "{name} must be positive semidefinite"
                )));
            }
        }
        Ok(())
    }
}

/// Per-step filtered output retained for diagnostics and tests.
#[derive(Debug, Clone)]
pub struct KalmanRun {
    /// Filtered gap z_t - level_t for t = 2..n (first observation dropped).
    pub gap: Vec<f64>,
    /// Filtered state covariance after each update.
    pub covariances: Vec<Matrix2<f64>>,
    /// One-step-ahead prediction errors (innovations).
    pub innovations: Vec<f64>,
}

/// Run the predict/update recursion and return the output gap
/// `z_t - level_t` from filtered states. The first observation initializes
/// the state (`s0 = [z_1, 0]`) and is dropped from the output, so the gap
/// series has length `n - 1`.
pub fn kalman_output_gap(z: &[f64], spec: &KalmanSpec) -> Result<KalmanRun> {
    spec.validate()?;
    let n = z.len();
    if n < 3 {
        return Err(CoreError::InvalidInput(format!(
            "kalman_output_gap needs at least 3 observations, got {n}"
        )));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::InvalidInput("kalman input must be finite".into()));
    }

    let g = Matrix2::new(spec.g[0][0], spec.g[0][1], spec.g[1][0], spec.g[1][1]);
    let f = RowVector2::new(spec.f[0], spec.f[1]);
    let w = Matrix2::new(spec.w[0][0], spec.w[0][1], spec.w[1][0], spec.w[1][1]);

    let mut s = Vector2::new(z[0], 0.0);
    let mut p = Matrix2::new(spec.c0[0][0], spec.c0[0][1], spec.c0[1][0], spec.c0[1][1]);

    let mut gap = Vec::with_capacity(n - 1);
    let mut covariances = Vec::with_capacity(n - 1);
    let mut innovations = Vec::with_capacity(n - 1);
    for &obs in &z[1..] {
        // predict
        s = g * s;
        p = g * p * g.transpose() + w;
        // update
        let denom = (f * p * f.transpose())[(0, 0)] + spec.v;
        let k = p * f.transpose() / denom;
        let innov = obs - (f * s)[(0, 0)];
        s += k * innov;
        p = (Matrix2::identity() - k * f) * p;
        gap.push(obs - s[0]);
        covariances.push(p);
        innovations.push(innov);
    }
    Ok(KalmanRun { gap, covariances, innovations })
}

/// HP output gap of a dated log-GDP series, as a dated series.
pub fn hp_gap_series(log_gdp: &QuarterlySeries, lambda: f64) -> Result<QuarterlySeries> {
    let (_, cycle) = hp_filter(&log_gdp.values, lambda)?;
    Ok(QuarterlySeries::new("hp_gap", log_gdp.start, cycle))
}

/// Kalman output gap of a dated log-GDP series; starts one quarter after the
/// input because the first observation is consumed by the initial state.
pub fn kalman_gap_series(log_gdp: &QuarterlySeries, spec: &KalmanSpec) -> Result<QuarterlySeries> {
    let run = kalman_output_gap(&log_gdp.values, spec)?;
    Ok(QuarterlySeries::new("kalman_gap", log_gdp.start.next(), run.gap))
}
