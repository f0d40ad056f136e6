//! One full calibration grid run with timing (exploration harness).
//!
//! Usage: cargo run -p nksim-core --example fullgrid --release -- [hp|kalman] [behavioral|rational] [seeds]

use nksim_core::calibrate::{run_grid, CalibrationContext, GridSpec, ModelKind};
use nksim_core::data::{covid_window, parse_fred_csv_file, qoq_inflation, rebase};
use nksim_core::filters::{hp_gap_series, kalman_gap_series, KalmanSpec};
use nksim_core::model::StructuralParams;
use nksim_core::simulate::{ShockScenario, SimConfig};
use nksim_core::stats::{MahalanobisSpec, MahalanobisStrategy};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let filter = args.get(1).map(String::as_str).unwrap_or("hp");
    let model = match args.get(2).map(String::as_str).unwrap_or("behavioral") {
        "rational" => ModelKind::Rational,
        _ => ModelKind::Behavioral,
    };
    let seeds: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(5);

    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let gdp = parse_fred_csv_file(root.join("india_gdp_q.csv")).unwrap();
    let log_gdp = gdp.ln("log_gdp").unwrap();
    let cpi = parse_fred_csv_file(root.join("india_cpi_q.csv")).unwrap();
    let infl = qoq_inflation(&rebase(&cpi, "2011Q4".parse().unwrap()).unwrap()).unwrap();
    let infl_w = covid_window(&infl, 16).unwrap();

    let (gap_w, eps1) = if filter == "kalman" {
        let g = kalman_gap_series(&log_gdp, &KalmanSpec::default()).unwrap();
        (covid_window(&g, 16).unwrap(), -0.18)
    } else {
        let g = hp_gap_series(&log_gdp, 1600.0).unwrap();
        (covid_window(&g, 16).unwrap(), -0.27)
    };
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let means = [mean(&gap_w.values), mean(&infl_w.values)];
    println!("filter={filter} model={model} seeds={seeds} data means = ({:+.4}, {:.4})", means[0], means[1]);

    let ctx = CalibrationContext {
        model,
        eps1,
        data_means: means,
        gap_window: gap_w.values.clone(),
        infl_window: infl_w.values.clone(),
        params: StructuralParams::default(),
        scenario: ShockScenario::default(),
        sim: SimConfig::default(),
        mspec: MahalanobisSpec {
            strategy: MahalanobisStrategy::PairedSeries,
            pinv_tolerance: 1e-12,
        },
    };
    let grid = GridSpec { seeds_per_point: seeds, ..GridSpec::default() };
    let t0 = std::time::Instant::now();
    let out = run_grid(&grid, &ctx, 1, None).unwrap();
    let dt = t0.elapsed();
    println!("grid of {} points in {:.1?}", out.results.len(), dt);
    for k in 0..10 {
        let r = &out.results[out.ranking[k]];
        println!(
            "  #{k}: ({:.2}, {:.2}, {:.2}) means=({:+.4}, {:+.4}) dist={:.4}",
            r.point.eta1, r.point.rho_eps, r.point.rho_eta, r.mean_y, r.mean_pi, r.distance
        );
    }
}
