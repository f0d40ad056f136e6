use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use nksim_core::data::read_series_csv;
use nksim_core::quarter::Quarter;
use nksim_core::report::Report;
use nksim_core::stats::lr_break_test;

use crate::commands::{ensure_out_dir, write_report};
use crate::config::RunConfig;

/// Mean-shift structural break test (LR / ANOVA) on a dated gap series.
#[derive(Debug, Args)]
pub struct BreakArgs {
    /// Gap csv as written by the gap command (quarter,value).
    pub gaps: PathBuf,
    /// Break date; this quarter opens the post-break regime.
    #[arg(long, default_value = "2020Q1")]
    pub break_date: Quarter,
    /// Output directory override.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(mut cfg: RunConfig, args: BreakArgs) -> Result<()> {
    if let Some(out) = args.out {
        cfg.output.dir = out;
    }
    let series = read_series_csv(
        std::fs::File::open(&args.gaps)
            .with_context(|| format!("opening {}", args.gaps.display()))?,
    )?;
    let b = lr_break_test(&series.values, series.start, args.break_date)?;

    println!("ANOVA for mean-shift break at {} ({})", args.break_date, series.id);
    println!("{:<34}{:>16}{:>16}", "Metric", "Model 1 (no break)", "Model 2 (break)");
    println!("{:<34}{:>16}{:>16}", "Residual degrees of freedom", b.n_pre + b.n_post - 1, b.n_pre + b.n_post - 2);
    println!("{:<34}{:>16.4}{:>16.4}", "Residual sum of squares", b.rss1, b.rss2);
    println!("{:<34}{:>16}{:>16}", "Df", "-", 1);
    println!("{:<34}{:>16}{:>16.4}", "Sum of squares", "-", b.rss1 - b.rss2);
    if b.exact_fit {
        println!("{:<34}{:>16}{:>16}", "F-statistic", "-", "exact fit");
        println!("{:<34}{:>16}{:>16}", "p-value", "-", "0");
    } else {
        println!("{:<34}{:>16}{:>16.2}", "F-statistic", "-", b.f_stat);
        println!("{:<34}{:>16}{:>16.3e}", "p-value", "-", b.p_value);
    }

    let out = ensure_out_dir(&cfg)?;
    let mut report = Report::new("break_test");
    report
        .push_str("series", &series.id)
        .push_str("break_date", args.break_date.to_string())
        .push_f64("rss1", b.rss1)
        .push_f64("rss2", b.rss2)
        .push_f64("f_stat", b.f_stat)
        .push_f64("p_value", b.p_value)
        .push_usize("n_pre", b.n_pre)
        .push_usize("n_post", b.n_post)
        .push_str("exact_fit", if b.exact_fit { "true" } else { "false" });
    let path = out.join(format!("break_{}.json", series.id));
    write_report(&report, &path)?;
    println!("report -> {}", path.display());
    Ok(())
}
