//! Moments, normality and structural-break tests, and the Mahalanobis
//! distance used as the calibration objective.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::quarter::Quarter;

/// Sample moments. Kurtosis is raw (normal = 3), matching the reported
/// tables; central moments use the 1/n convention, variance uses 1/(n-1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub n: usize,
}

pub fn moments(x: &[f64]) -> Result<MomentSet> {
    let n = x.len();
    if n < 2 {
        return Err(CoreError::DegenerateSample(format!(
            "need at least 2 observations, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let variance = m2 / (nf - 1.0);
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 == 0.0 {
        return Err(CoreError::DegenerateSample("zero variance".into()));
    }
    Ok(MomentSet {
        mean,
        variance,
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
        n,
    })
}

/// Jarque-Bera result: statistic and its chi-square(2) p-value.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct JarqueBera {
    pub statistic: f64,
    pub p_value: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub n: usize,
}

/// `jb = n/6 (S^2 + (K-3)^2/4)` with raw kurtosis K; the chi-square(2)
/// survival function is exactly `exp(-jb/2)`.
pub fn jarque_bera(x: &[f64]) -> Result<JarqueBera> {
    let n = x.len();
    if n < 8 {
        return Err(CoreError::DegenerateSample(format!(
            "jarque_bera needs at least 8 observations, got {n}"
        )));
    }
    let m = moments(x)?;
    let jb = n as f64 / 6.0 * (m.skewness * m.skewness + (m.kurtosis - 3.0).powi(2) / 4.0);
    Ok(JarqueBera {
        statistic: jb,
        p_value: jb_p_value(jb),
        skewness: m.skewness,
        kurtosis: m.kurtosis,
        n,
    })
}

/// Chi-square(2) survival function.
pub fn jb_p_value(jb: f64) -> f64 {
    (-jb / 2.0).exp()
}

/// Which covariance the Mahalanobis quadratic form uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MahalanobisStrategy {
    /// Sigma is the sample covariance of the two 2-vectors treated as two
    /// observations (rank <= 1); the pseudo-inverse quadratic form equals
    /// sqrt(2) for any pair of distinct vectors.
    PaperTwoObs,
    /// Sigma is the 2x2 sample covariance of the paired quarterly
    /// (gap, inflation) observations of the actual data window.
    PairedSeries,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MahalanobisSpec {
    pub strategy: MahalanobisStrategy,
    /// Relative singular-value cutoff for the pseudo-inverse.
    pub pinv_tolerance: f64,
}

impl Default for MahalanobisSpec {
    fn default() -> Self {
        MahalanobisSpec {
            strategy: MahalanobisStrategy::PaperTwoObs,
            pinv_tolerance: 1e-12,
        }
    }
}

/// Mahalanobis distance between two 2-vectors of (mean gap, mean inflation).
///
/// `windows` supplies the paired 16-quarter series required by the
/// `PairedSeries` strategy (gap values, inflation values).
pub fn mahalanobis(
    s_sim: [f64; 2],
    s_data: [f64; 2],
    windows: Option<(&[f64], &[f64])>,
    spec: &MahalanobisSpec,
) -> Result<f64> {
    if !spec.pinv_tolerance.is_finite() || spec.pinv_tolerance <= 0.0 {
        return Err(CoreError::InvalidParameter("pinv tolerance must be > 0".into()));
    }
    if s_sim.iter().chain(s_data.iter()).any(|v| !v.is_finite()) {
        return Err(CoreError::InvalidInput("mahalanobis inputs must be finite".into()));
    }
    let diff = Vector2::new(s_sim[0] - s_data[0], s_sim[1] - s_data[1]);
    match spec.strategy {
        MahalanobisStrategy::PaperTwoObs => {
            // two observations of a 2-d variable: Sigma = d d' / 2
            let sigma = diff * diff.transpose() / 2.0;
            let qf = pinv_quadratic_form(&sigma, &diff, spec.pinv_tolerance);
            Ok(qf.sqrt())
        }
        MahalanobisStrategy::PairedSeries => {
            let (gaps, infl) = windows.ok_or_else(|| {
                CoreError::InvalidInput("paired_series strategy requires the data windows".into())
            })?;
            if gaps.len() != infl.len() || gaps.len() < 2 {
                return Err(CoreError::InvalidInput(
                    "paired windows must have equal length >= 2".into(),
                ));
            }
            let n = gaps.len() as f64;
            let mg = gaps.iter().sum::<f64>() / n;
            let mi = infl.iter().sum::<f64>() / n;
            let mut sgg = 0.0;
            let mut sii = 0.0;
            let mut sgi = 0.0;
            for (g, i) in gaps.iter().zip(infl) {
                sgg += (g - mg) * (g - mg);
                sii += (i - mi) * (i - mi);
                sgi += (g - mg) * (i - mi);
            }
            let sigma = Matrix2::new(sgg, sgi, sgi, sii) / (n - 1.0);
            let det = sigma.determinant();
            if det.abs() <= spec.pinv_tolerance * sigma.norm().powi(2).max(f64::MIN_POSITIVE) {
                if diff.norm() == 0.0 {
                    return Ok(0.0);
                }
                return Err(CoreError::SingularCovariance(
                    "paired-series covariance is singular".into(),
                ));
            }
            let inv = sigma
                .try_inverse()
                .ok_or_else(|| CoreError::SingularCovariance("2x2 inversion failed".into()))?;
            let qf = (diff.transpose() * inv * diff)[(0, 0)];
            Ok(qf.max(0.0).sqrt())
        }
    }
}

/// Quadratic form `d' Sigma^+ d` through a symmetric-eigen pseudo-inverse
/// with a relative singular-value cutoff.
fn pinv_quadratic_form(sigma: &Matrix2<f64>, d: &Vector2<f64>, tol: f64) -> f64 {
    let eig = nalgebra::SymmetricEigen::new(*sigma);
    let max_ev = eig.eigenvalues.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
    if max_ev == 0.0 {
        return 0.0;
    }
    let mut qf = 0.0;
    for i in 0..2 {
        let ev = eig.eigenvalues[i];
        if ev.abs() > tol * max_ev {
            let proj = eig.eigenvectors.column(i).dot(d);
            qf += proj * proj / ev;
        }
    }
    qf
}

/// Outcome of the likelihood-ratio / ANOVA structural break test.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BreakTest {
    /// Residual sum of squares under a single mean (df = n - 1).
    pub rss1: f64,
    /// Residual sum of squares with separate pre/post means (df = n - 2).
    pub rss2: f64,
    pub f_stat: f64,
    pub p_value: f64,
    pub n_pre: usize,
    pub n_post: usize,
    /// Set when the two-mean model fits exactly (F is unbounded).
    pub exact_fit: bool,
}

/// Mean-shift LR test on a dated series. The break date opens the post
/// regime: pre = {t < break}, post = {t >= break}.
pub fn lr_break_test(
    values: &[f64],
    start: Quarter,
    break_date: Quarter,
) -> Result<BreakTest> {
    let n = values.len();
    let k = break_date.quarters_since(&start);
    if k < 2 || (k as usize) > n.saturating_sub(2) {
        return Err(CoreError::InvalidInput(format!(
            "break at {break_date} leaves fewer than 2 observations on one side"
        )));
    }
    let k = k as usize;
    let (pre, post) = values.split_at(k);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let rss = |v: &[f64], m: f64| v.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    let grand = mean(values);
    let rss1 = rss(values, grand);
    let rss2 = rss(pre, mean(pre)) + rss(post, mean(post));
    let df2 = (n - 2) as f64;
    if rss2 == 0.0 {
        return Ok(BreakTest {
            rss1,
            rss2,
            f_stat: f64::INFINITY,
            p_value: 0.0,
            n_pre: k,
            n_post: n - k,
            exact_fit: true,
        });
    }
    let f_stat = (rss1 - rss2) / (rss2 / df2);
    let f_stat = f_stat.max(0.0);
    Ok(BreakTest {
        rss1,
        rss2,
        f_stat,
        p_value: f_survival(f_stat, 1.0, df2),
        n_pre: k,
        n_post: n - k,
        exact_fit: false,
    })
}

/// Survival function of the F(d1, d2) distribution via the regularized
/// incomplete beta function: `P(F > f) = I_{d2/(d2 + d1 f)}(d2/2, d1/2)`.
pub fn f_survival(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    let x = d2 / (d2 + d1 * f);
    regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, x)
}

/// Survival function of |t| with `df` degrees of freedom:
/// `P(|t| > x) = I_{df/(df + x^2)}(df/2, 1/2)`.
pub fn t_two_sided_survival(x: f64, df: f64) -> f64 {
    let x2 = x * x;
    regularized_incomplete_beta(df / 2.0, 0.5, df / (df + x2))
}

/// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    // use the symmetry that keeps the continued fraction convergent
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() / a) * beta_cf(a, b, x)
    } else {
        1.0 - (((b * (1.0 - x).ln() + a * x.ln() - ln_beta(a, b)).exp()) / b)
            * beta_cf(b, a, 1.0 - x)
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Lanczos approximation of ln Gamma, accurate to ~1e-13 for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_degenerate_and_symmetric() {
        assert!(moments(&[1.0, 1.0, 1.0, 1.0]).is_err());
        let m = moments(&[-1.0, 1.0]).unwrap();
        assert!(m.mean.abs() < 1e-15);
        assert!(m.skewness.abs() < 1e-15);
    }

    #[test]
    fn moments_match_normal_sample() {
        // Monte Carlo oracle: large N(0,1) sample has kurtosis ~ 3
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12345);
        let x: Vec<f64> = (0..1_000_000)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        let m = moments(&x).unwrap();
        assert!((m.kurtosis - 3.0).abs() < 0.02, "kurtosis {}", m.kurtosis);
        assert!(m.skewness.abs() < 0.01);
        assert!((m.variance - 1.0).abs() < 0.01);
    }

    #[test]
    fn jb_closed_form_values() {
        // p(2 ln 2) = 0.5 by the exact chi-square(2) survival function
        assert!((jb_p_value(2.0 * 2.0f64.ln()) - 0.5).abs() < 1e-15);
        assert!((jb_p_value(0.0) - 1.0).abs() < 1e-15);
        // p strictly decreasing in jb
        let mut prev = 1.0;
        for i in 1..100 {
            let p = jb_p_value(i as f64 * 0.1);
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn jb_needs_eight_observations_and_nonzero_variance() {
        assert!(jarque_bera(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).is_err());
        assert!(jarque_bera(&[2.0; 12]).is_err());
        let zero_skew_normalish = [-1.5, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 1.5];
        let jb = jarque_bera(&zero_skew_normalish).unwrap();
        assert!(jb.skewness.abs() < 1e-12);
        assert!(jb.p_value > 0.0 && jb.p_value <= 1.0);
    }

    #[test]
    fn mahalanobis_equal_vectors_is_zero() {
        let spec = MahalanobisSpec::default();
        let d = mahalanobis([0.3, -1.2], [0.3, -1.2], None, &spec).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn mahalanobis_two_obs_plateau_on_reference_vectors() {
        let spec = MahalanobisSpec::default();
        // reference rational-regime mean vectors
        let d = mahalanobis([-0.20305, 0.3618], [-0.0046, 1.2580], None, &spec).unwrap();
        assert!((d - std::f64::consts::SQRT_2).abs() < 1e-9, "d = {d}");
    }

    #[test]
    fn mahalanobis_two_obs_plateau_for_random_pairs() {
        use rand::{Rng, SeedableRng};
        let spec = MahalanobisSpec::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let a: [f64; 2] = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            let b: [f64; 2] = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            if (a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9 {
                continue;
            }
            let d = mahalanobis(a, b, None, &spec).unwrap();
            assert!((d - std::f64::consts::SQRT_2).abs() < 1e-9, "d = {d}");
        }
    }

    #[test]
    fn mahalanobis_symmetry_both_strategies() {
        let gaps: Vec<f64> = (0..16).map(|i| (i as f64 * 0.7).sin() * 0.05).collect();
        let infl: Vec<f64> = (0..16).map(|i| 1.2 + (i as f64 * 0.4).cos() * 0.8).collect();
        for strategy in [MahalanobisStrategy::PaperTwoObs, MahalanobisStrategy::PairedSeries] {
            let spec = MahalanobisSpec { strategy, pinv_tolerance: 1e-12 };
            let d1 = mahalanobis([0.1, 1.0], [-0.2, 2.0], Some((&gaps, &infl)), &spec).unwrap();
            let d2 = mahalanobis([-0.2, 2.0], [0.1, 1.0], Some((&gaps, &infl)), &spec).unwrap();
            assert!((d1 - d2).abs() < 1e-12);
            assert!(d1 >= 0.0);
        }
    }

    #[test]
    fn mahalanobis_identity_covariance_reduces_to_euclidean() {
        // windows engineered so the sample covariance is exactly the identity:
        // cos/sin patterns are orthogonal with known sums of squares
        let n = 16;
        let c = (15.0f64 / 16.0).sqrt() * std::f64::consts::SQRT_2;
        let gaps: Vec<f64> = (0..n)
            .map(|i| c * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
            .collect();
        let infl: Vec<f64> = (0..n)
            .map(|i| c * (2.0 * std::f64::consts::PI * i as f64 / n as f64).sin())
            .collect();
        let spec = MahalanobisSpec {
            strategy: MahalanobisStrategy::PairedSeries,
            pinv_tolerance: 1e-12,
        };
        let d = mahalanobis([3.0, 4.0], [0.0, 0.0], Some((&gaps, &infl)), &spec).unwrap();
        assert!((d - 5.0).abs() < 1e-9, "d = {d}");
    }

    #[test]
    fn paired_series_singular_covariance_errors() {
        let gaps = vec![1.0; 16];
        let infl = vec![2.0; 16];
        let spec = MahalanobisSpec {
            strategy: MahalanobisStrategy::PairedSeries,
            pinv_tolerance: 1e-12,
        };
        let r = mahalanobis([0.1, 1.0], [0.0, 0.9], Some((&gaps, &infl)), &spec);
        assert!(matches!(r, Err(CoreError::SingularCovariance(_))));
    }

    #[test]
    fn break_test_equal_means_gives_f_zero() {
        let start: Quarter = "2000Q1".parse().unwrap();
        let x = [1.0, 2.0, 3.0, 1.0, 2.0, 3.0];
        let b = lr_break_test(&x, start, "2000Q4".parse().unwrap()).unwrap();
        assert!(b.f_stat.abs() < 1e-12);
        assert!((b.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn break_test_step_series_is_exact_fit() {
        let start: Quarter = "2000Q1".parse().unwrap();
        let mut x = vec![0.0; 10];
        x.extend(vec![1.0; 10]);
        let b = lr_break_test(&x, start, "2002Q3".parse().unwrap()).unwrap();
        assert!(b.exact_fit);
        assert!(b.f_stat.is_infinite());
        assert_eq!(b.rss2, 0.0);
        assert_eq!(b.n_pre, 10);
    }

    #[test]
    fn break_test_shift_invariance() {
        let start: Quarter = "2000Q1".parse().unwrap();
        let x: Vec<f64> = (0..24).map(|i| (i as f64 * 0.9).sin()).collect();
        let shifted: Vec<f64> = x.iter().map(|v| v + 11.0).collect();
        let brk: Quarter = "2003Q1".parse().unwrap();
        let b1 = lr_break_test(&x, start, brk).unwrap();
        let b2 = lr_break_test(&shifted, start, brk).unwrap();
        assert!((b1.f_stat - b2.f_stat).abs() < 1e-9);
    }

    #[test]
    fn break_test_rejects_tiny_subsamples() {
        let start: Quarter = "2000Q1".parse().unwrap();
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!(lr_break_test(&x, start, "2000Q2".parse().unwrap()).is_err());
        assert!(lr_break_test(&x, start, "2000Q4".parse().unwrap()).is_err());
    }

    #[test]
    fn f_p_value_matches_t_identity() {
        for &(f, df) in &[(0.5, 10.0), (2.3, 20.0), (11.52, 79.0), (28.41, 78.0)] {
            let p_f = f_survival(f, 1.0, df);
            let p_t = t_two_sided_survival(f.sqrt(), df);
            assert!((p_f - p_t).abs() < 1e-10, "f={f} df={df}: {p_f} vs {p_t}");
        }
    }

    #[test]
    fn f_p_value_matches_quadrature_oracle() {
        // independent oracle: numerically integrate the transformed beta
        // integrand I_x(a, 1/2) = int_0^x u^(a-1)(1-u)^(-1/2) du / B(a, 1/2)
        // with the substitution 1-u = v^2, which removes the endpoint
        // singularity: int = 2 int_{sqrt(1-x)}^{1} (1-v^2)^(a-1) dv.
        fn smooth_integral(a: f64, lo: f64) -> f64 {
            // Simpson on [lo, 1] with many panels
            let n = 20_000;
            let h = (1.0 - lo) / n as f64;
            let f = |v: f64| (1.0 - v * v).powf(a - 1.0);
            let mut s = f(lo) + f(1.0);
            for i in 1..n {
                let v = lo + i as f64 * h;
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(v);
            }
            2.0 * s * h / 3.0
        }
        for &(fstat, df) in &[(2.0, 30.0), (11.52, 79.0), (28.41, 78.0)] {
            let a = df / 2.0;
            let x = df / (df + fstat);
            let numer = smooth_integral(a, (1.0 - x).sqrt());
            let denom = smooth_integral(a, 0.0);
            let oracle = numer / denom;
            let ours = f_survival(fstat, 1.0, df);
            assert!((ours - oracle).abs() < 1e-9, "f={fstat}: {ours} vs {oracle}");
        }
    }

    #[test]
    fn kurtosis_respects_pearson_bound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let x: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let m = moments(&x).unwrap();
            assert!(m.kurtosis >= 1.0 - 1e-12);
        }
    }
}
