//! Rational-expectations decision rule for the three-equation model, solved
//! by undetermined coefficients: cast the system as
//! `x_t = A E_t x_{t+1} + B x_{t-1} + b_eps eps_t + b_eta eta_t` with
//! `x = (y, pi, i)`, guess `x_t = C x_{t-1} + D_eps eps_t + D_eta eta_t`
//! under AR(1) shock forecasts, and iterate the fixed point
//! `C = (I - A C)^{-1} B`.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::StructuralParams;

/// Linear decision rule of the rational model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReDecisionRule {
    /// State transition on (y, pi, i), row-major.
    pub c: [[f64; 3]; 3],
    /// Demand-shock loading.
    pub d_eps: [f64; 3],
    /// Supply-shock loading.
    pub d_eta: [f64; 3],
}

impl ReDecisionRule {
    pub fn c_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.c[r][c])
    }

    pub fn d_eps_vec(&self) -> Vector3<f64> {
        Vector3::from_column_slice(&self.d_eps)
    }

    pub fn d_eta_vec(&self) -> Vector3<f64> {
        Vector3::from_column_slice(&self.d_eta)
    }

    /// One step of the rule: `x = C x_prev + D_eps eps + D_eta eta`.
    pub fn step(&self, x_prev: &Vector3<f64>, eps: f64, eta: f64) -> Vector3<f64> {
        self.c_matrix() * x_prev + self.d_eps_vec() * eps + self.d_eta_vec() * eta
    }
}

/// Reduced-form system pieces: expectation matrix A, lag matrix B and the
/// two shock loadings.
pub type ReducedForm = (Matrix3<f64>, Matrix3<f64>, Vector3<f64>, Vector3<f64>);

/// Structural-to-reduced-form assembly: returns (A, B, b_eps, b_eta) with
/// the contemporaneous block already inverted out.
pub fn assemble_system(p: &StructuralParams, kappa: f64) -> Result<ReducedForm> {
    p.validate()?;
    // M0 x_t = M1 E x_{t+1} + M2 x_{t-1} + m_eps eps + m_eta eta
    let m0 = Matrix3::new(
        1.0,
        0.0,
        1.0 / p.sigma,
        -kappa,
        1.0,
        0.0,
        -(1.0 - p.c3) * p.c2,
        -(1.0 - p.c3) * p.c1,
        1.0,
    );
    let m1 = Matrix3::new(1.0, 1.0 / p.sigma, 0.0, 0.0, p.beta, 0.0, 0.0, 0.0, 0.0);
    let m2 = Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, p.c3);
    let m0_inv = m0
        .try_inverse()
        .ok_or_else(|| CoreError::DegenerateParameters("contemporaneous block singular".into()))?;
    Ok((
        m0_inv * m1,
        m0_inv * m2,
        m0_inv * Vector3::new(1.0, 0.0, 0.0),
        m0_inv * Vector3::new(0.0, 1.0, 0.0),
    ))
}

/// Generic fixed-point solve of `C = (I - A C)^{-1} B` in any dimension,
/// starting from zero, with a hard iteration cap. Returns the converged C.
pub fn solve_transition_fixed_point(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let mut c = DMatrix::<f64>::zeros(n, n);
    for _ in 0..max_iter {
        let lhs = &eye - a * &c;
        let next = lhs
            .lu()
            .solve(b)
            .ok_or_else(|| CoreError::Indeterminacy("(I - A C) became singular".into()))?;
        let delta = (&next - &c).abs().max();
        c = next;
        if delta < tol {
            let radius = spectral_radius(&c);
            if radius >= 1.0 {
                return Err(CoreError::Instability(format!(
                    "transition spectral radius {radius:.6} >= 1"
                )));
            }
            return Ok(c);
        }
    }
    Err(CoreError::Indeterminacy(format!(
        "no fixed point after {max_iter} iterations (tol {tol:e})"
    )))
}

/// Largest eigenvalue modulus, via Gelfand's formula with repeated squaring:
/// `radius = lim ||M^m||^(1/m)`. Renormalizing every squaring keeps the
/// computation in range; 40 squarings give ~7 digits, ample for stability
/// checks. (Direct eigen-solves are avoided: the QR iteration can stall on
/// exactly-degenerate matrices such as the all-zero transition.)
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    let norm0 = m.norm();
    if norm0 == 0.0 {
        return 0.0;
    }
    let mut a = m / norm0;
    let mut log_radius = norm0.ln();
    let mut weight = 1.0f64;
    for _ in 0..40 {
        a = &a * &a;
        weight *= 0.5;
        let n = a.norm();
        if n == 0.0 {
            return 0.0;
        }
        log_radius += weight * n.ln();
        a /= n;
    }
    log_radius.exp()
}

/// Solve the full decision rule for the given shock persistences.
///
/// The shock loadings solve `(I - A C - rho_s A) D_s = b_s` per shock.
pub fn solve_re_rule(
    p: &StructuralParams,
    kappa: f64,
    rho_eps: f64,
    rho_eta: f64,
) -> Result<ReDecisionRule> {
    for (name, rho) in [("rho_eps", rho_eps), ("rho_eta", rho_eta)] {
        if !(0.0..=1.0).contains(&rho) {
            return Err(CoreError::InvalidParameter(format!("{name} must be in [0,1]")));
        }
    }
    let (a3, b3, beps, beta_v) = assemble_system(p, kappa)?;
    let a = DMatrix::from_fn(3, 3, |r, c| a3[(r, c)]);
    let b = DMatrix::from_fn(3, 3, |r, c| b3[(r, c)]);
    let c = solve_transition_fixed_point(&a, &b, 1e-12, 10_000)?;

    let eye = DMatrix::<f64>::identity(3, 3);
    let solve_loading = |rho: f64, bv: &Vector3<f64>| -> Result<Vector3<f64>> {
        let lhs = &eye - &a * &c - &a * rho;
        let rhs = DVector::from_column_slice(bv.as_slice());
        let d = lhs.lu().solve(&rhs).ok_or_else(|| {
            CoreError::Indeterminacy(format!("shock loading singular at rho = {rho}"))
        })?;
        Ok(Vector3::new(d[0], d[1], d[2]))
    };
    let d_eps = solve_loading(rho_eps, &beps)?;
    let d_eta = solve_loading(rho_eta, &beta_v)?;

    let c3m = Matrix3::from_fn(|r, cc| c[(r, cc)]);
    Ok(ReDecisionRule {
        c: [
            [c3m[(0, 0)], c3m[(0, 1)], c3m[(0, 2)]],
            [c3m[(1, 0)], c3m[(1, 1)], c3m[(1, 2)]],
            [c3m[(2, 0)], c3m[(2, 1)], c3m[(2, 2)]],
        ],
        d_eps: [d_eps[0], d_eps[1], d_eps[2]],
        d_eta: [d_eta[0], d_eta[1], d_eta[2]],
    })
}
