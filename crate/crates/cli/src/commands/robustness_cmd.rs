use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use nksim_core::report::Report;
use nksim_core::simulate::{
    simulate_behavioral, simulate_rational, NoiseMode, ShockScenario, SimConfig,
};
use nksim_core::stats::jarque_bera;

use crate::commands::{ensure_out_dir, write_report};
use crate::config::RunConfig;

/// Stochastic robustness runs: both regimes driven by AR(1) errors
/// (persistence 0.95, innovation variance 0.5) with no scenario shocks;
/// Jarque-Bera normality of the sampled window is compared across regimes.
#[derive(Debug, Args)]
pub struct RobustnessArgs {
    #[arg(long, default_value_t = 20240401)]
    pub seed: u64,
    /// Number of seeds; with more than one, rejection frequencies at 5%
    /// are reported per regime and variable.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    /// Observation window start:end (inclusive).
    #[arg(long, default_value = "1000:1080")]
    pub window: String,
    /// Output directory override.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_window(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    anyhow::ensure!(parts.len() == 2, "window must be start:end, got {s:?}");
    let a: usize = parts[0].parse()?;
    let b: usize = parts[1].parse()?;
    anyhow::ensure!(b > a, "window end must exceed start");
    Ok((a, b))
}

/// The appendix-style stochastic configuration.
pub fn stochastic_config(base: &SimConfig, seed: u64) -> SimConfig {
    SimConfig {
        seed,
        noise_mode: NoiseMode::Ar1,
        noise_rho: 0.95,
        noise_sd_demand: 0.5f64.sqrt(),
        noise_sd_supply: 0.5f64.sqrt(),
        ..*base
    }
}

pub struct RegimeNormality {
    pub p_gap: f64,
    pub p_infl: f64,
}

pub fn one_run(
    cfg: &RunConfig,
    seed: u64,
    window: (usize, usize),
    behavioral: bool,
) -> Result<RegimeNormality> {
    let scenario = ShockScenario {
        eps1: 0.0,
        eta1: 0.0,
        ..cfg.scenario
    };
    let sim = stochastic_config(&cfg.sim, seed);
    anyhow::ensure!(
        window.1 < sim.periods,
        "window {}..{} outside the {}-period simulation",
        window.0,
        window.1,
        sim.periods
    );
    let path = if behavioral {
        simulate_behavioral(&cfg.params, &scenario, &sim)?
    } else {
        simulate_rational(&cfg.params, &scenario, &sim)?
    };
    let gap = &path.y[window.0..=window.1];
    let infl = &path.pi[window.0..=window.1];
    Ok(RegimeNormality {
        p_gap: jarque_bera(gap)?.p_value,
        p_infl: jarque_bera(infl)?.p_value,
    })
}

pub fn run(mut cfg: RunConfig, args: RobustnessArgs) -> Result<()> {
    if let Some(out) = args.out {
        cfg.output.dir = out;
    }
    let window = parse_window(&args.window)?;
    let out = ensure_out_dir(&cfg)?;

    if args.runs <= 1 {
        let b = one_run(&cfg, args.seed, window, true)?;
        let r = one_run(&cfg, args.seed, window, false)?;
        println!("Jarque-Bera p-values over observations {}..{}:", window.0, window.1);
        println!("{:<36}{:>12}{:>14}", "Series", "p-value", "normal at 5%");
        for (name, p) in [
            ("simulated behavioral output gap", b.p_gap),
            ("simulated rational output gap", r.p_gap),
            ("simulated behavioral inflation", b.p_infl),
            ("simulated rational inflation", r.p_infl),
        ] {
            println!("{:<36}{:>12.4}{:>14}", name, p, if p >= 0.05 { "normal" } else { "non-normal" });
        }
        let mut report = Report::new("robustness");
        report
            .push_usize("seed", args.seed as usize)
            .push_f64("behavioral_gap_p", b.p_gap)
            .push_f64("rational_gap_p", r.p_gap)
            .push_f64("behavioral_infl_p", b.p_infl)
            .push_f64("rational_infl_p", r.p_infl);
        let path = out.join("robustness.json");
        write_report(&report, &path)?;
        println!("report -> {}", path.display());
        return Ok(());
    }

    let mut rej = [[0usize; 2]; 2]; // [behavioral, rational] x [gap, infl]
    for k in 0..args.runs {
        let seed = args.seed.wrapping_add(k as u64);
        let b = one_run(&cfg, seed, window, true)?;
        let r = one_run(&cfg, seed, window, false)?;
        rej[0][0] += (b.p_gap < 0.05) as usize;
        rej[0][1] += (b.p_infl < 0.05) as usize;
        rej[1][0] += (r.p_gap < 0.05) as usize;
        rej[1][1] += (r.p_infl < 0.05) as usize;
    }
    let n = args.runs as f64;
    println!("normality rejection frequencies at 5% over {} seeds:", args.runs);
    println!("  behavioral: gap {:.3}, inflation {:.3}", rej[0][0] as f64 / n, rej[0][1] as f64 / n);
    println!("  rational:   gap {:.3}, inflation {:.3}", rej[1][0] as f64 / n, rej[1][1] as f64 / n);
    let mut report = Report::new("robustness_frequencies");
    report
        .push_usize("runs", args.runs)
        .push_f64("behavioral_gap_reject", rej[0][0] as f64 / n)
        .push_f64("behavioral_infl_reject", rej[0][1] as f64 / n)
        .push_f64("rational_gap_reject", rej[1][0] as f64 / n)
        .push_f64("rational_infl_reject", rej[1][1] as f64 / n);
    let path = out.join("robustness.json");
    write_report(&report, &path)?;
    println!("report -> {}", path.display());
    Ok(())
}
