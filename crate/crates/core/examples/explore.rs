//! Exploration harness for calibration dynamics (not part of the test suite).
//!
//! Run: cargo run -p nksim-core --example explore --release

use nksim_core::calibrate::{evaluate_point, CalibrationContext, GridPoint, ModelKind};
use nksim_core::data::{covid_window, parse_fred_csv_file, qoq_inflation, rebase};
use nksim_core::filters::{hp_gap_series, kalman_gap_series, KalmanSpec};
use nksim_core::model::StructuralParams;
use nksim_core::simulate::{NoiseMode, ShockScenario, SimConfig};
use nksim_core::stats::{MahalanobisSpec, MahalanobisStrategy};

fn main() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let gdp = parse_fred_csv_file(root.join("india_gdp_q.csv")).unwrap();
    let log_gdp = gdp.ln("log_gdp").unwrap();
    let cpi = parse_fred_csv_file(root.join("india_cpi_q.csv")).unwrap();
    let infl = qoq_inflation(&rebase(&cpi, "2011Q4".parse().unwrap()).unwrap()).unwrap();
    let infl_w = covid_window(&infl, 16).unwrap();

    let hp = hp_gap_series(&log_gdp, 1600.0).unwrap();
    let hp_w = covid_window(&hp, 16).unwrap();
    let kal = kalman_gap_series(&log_gdp, &KalmanSpec::default()).unwrap();
    let kal_w = covid_window(&kal, 16).unwrap();

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let hp_means = [mean(&hp_w.values), mean(&infl_w.values)];
    let kal_means = [mean(&kal_w.values), mean(&infl_w.values)];
    println!("actual HP means  = ({:+.4}, {:.4})", hp_means[0], hp_means[1]);
    println!("actual KAL means = ({:+.4}, {:.4})", kal_means[0], kal_means[1]);

    let ctx = |model, eps1: f64, means: [f64; 2], gapw: &[f64]| CalibrationContext {
        model,
        eps1,
        data_means: means,
        gap_window: gapw.to_vec(),
        infl_window: infl_w.values.clone(),
        params: StructuralParams::default(),
        scenario: ShockScenario::default(),
        sim: SimConfig::default(),
        mspec: MahalanobisSpec {
            strategy: MahalanobisStrategy::PairedSeries,
            pinv_tolerance: 1e-12,
        },
    };

    // reference scenario, behavioral, several seeds
    let bctx = ctx(ModelKind::Behavioral, -0.27, hp_means, &hp_w.values);
    println!("\nbehavioral at reference point (0.64, 0.8, 0.9), noise default, seeds_per_point:");
    for spp in [1, 5, 20] {
        let r = evaluate_point(
            GridPoint { eta1: 0.64, rho_eps: 0.8, rho_eta: 0.9 },
            0,
            spp,
            &bctx,
        );
        println!(
            "  spp={spp:2}: means=({:+.4}, {:+.4}) dist={:.4}",
            r.mean_y, r.mean_pi, r.distance
        );
    }

    // deterministic sweep over eta1 at (0.8, 0.9)
    let mut dctx = bctx.clone();
    dctx.sim.noise_mode = NoiseMode::None;
    println!("\ndeterministic behavioral sweep over eta1 (rho_eps=0.8, rho_eta=0.9):");
    for eta1 in [0.0, 0.2, 0.4, 0.57, 0.64, 0.8, 1.0] {
        let r = evaluate_point(GridPoint { eta1, rho_eps: 0.8, rho_eta: 0.9 }, 0, 1, &dctx);
        println!(
            "  eta1={eta1:.2}: means=({:+.4}, {:+.4}) dist={:.4}",
            r.mean_y, r.mean_pi, r.distance
        );
    }
    println!("\ndeterministic sweep over rho_eta (eta1=0.64, rho_eps=0.8):");
    for rho_eta in [0.0, 0.3, 0.6, 0.8, 0.9, 0.95, 1.0] {
        let r = evaluate_point(GridPoint { eta1: 0.64, rho_eps: 0.8, rho_eta }, 0, 1, &dctx);
        println!(
            "  rho_eta={rho_eta:.2}: means=({:+.4}, {:+.4}) dist={:.4}",
            r.mean_y, r.mean_pi, r.distance
        );
    }
    println!("\ndeterministic sweep over rho_eps (eta1=0.64, rho_eta=0.9):");
    for rho_eps in [0.0, 0.3, 0.6, 0.8, 0.9, 1.0] {
        let r = evaluate_point(GridPoint { eta1: 0.64, rho_eps, rho_eta: 0.9 }, 0, 1, &dctx);
        println!(
            "  rho_eps={rho_eps:.2}: means=({:+.4}, {:+.4}) dist={:.4}",
            r.mean_y, r.mean_pi, r.distance
        );
    }

    // rational benchmark point (1.0, 0.0, 1.0)
    println!("\nrational benchmark (1.0, 0.0, 1.0):");
    for (tag, eps1, means, gapw) in [
        ("HP ", -0.27, hp_means, &hp_w.values),
        ("KAL", -0.18, kal_means, &kal_w.values),
    ] {
        let rctx = ctx(ModelKind::Rational, eps1, means, gapw);
        let r = evaluate_point(GridPoint { eta1: 1.0, rho_eps: 0.0, rho_eta: 1.0 }, 0, 5, &rctx);
        println!(
            "  {tag}: means=({:+.4}, {:+.4}) paired dist={:.4}",
            r.mean_y, r.mean_pi, r.distance
        );
        let two_obs = nksim_core::stats::mahalanobis(
            [r.mean_y, r.mean_pi],
            means,
            None,
            &MahalanobisSpec::default(),
        )
        .unwrap();
        println!("       paper_two_obs dist = {two_obs:.4}");
    }

    // timing probe for one behavioral evaluation (full horizon 1016)
    let t0 = std::time::Instant::now();
    let mut acc = 0.0;
    for i in 0..50 {
        let r = evaluate_point(GridPoint { eta1: 0.5, rho_eps: 0.5, rho_eta: 0.5 }, i, 1, &bctx);
        acc += r.distance;
    }
    let dt = t0.elapsed();
    println!(
        "\n50 behavioral evals took {:?} ({:.1} us/eval); checksum {acc:.3}",
        dt,
        dt.as_micros() as f64 / 50.0
    );
}
