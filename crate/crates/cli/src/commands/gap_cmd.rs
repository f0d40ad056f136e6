use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use nksim_core::data::write_series_csv;

use crate::chart::{line_chart, Series};
use crate::commands::{ensure_out_dir, gap_series, FilterKind};
use crate::config::RunConfig;

/// Estimate output gaps from quarterly GDP and plot them.
#[derive(Debug, Args)]
pub struct GapArgs {
    /// GDP csv (FRED two-column format); defaults to the bundled snapshot.
    #[arg(long)]
    pub gdp: Option<PathBuf>,
    /// Download a fresh series from FRED by id instead of reading a file
    /// (opt-in network access); the csv is saved to the output directory.
    #[arg(long, conflicts_with = "gdp")]
    pub fetch_gdp: Option<String>,
    /// Which filter to run; both produces the overlay chart.
    #[arg(long, default_value = "both")]
    pub filter: String,
    /// HP smoothing parameter.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Output directory override.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(mut cfg: RunConfig, args: GapArgs) -> Result<()> {
    if let Some(gdp) = args.gdp {
        cfg.data.gdp_csv = gdp;
    }
    if let Some(lambda) = args.lambda {
        cfg.data.hp_lambda = lambda;
    }
    if let Some(out) = args.out {
        cfg.output.dir = out;
    }
    let out = ensure_out_dir(&cfg)?;

    if let Some(series_id) = &args.fetch_gdp {
        let body = nksim_core::data::fetch_fred_series(series_id)?;
        let path = out.join(format!("{series_id}.csv"));
        std::fs::write(&path, body)?;
        println!("fetched {series_id} -> {}", path.display());
        cfg.data.gdp_csv = path;
    }

    let which: Vec<FilterKind> = match args.filter.as_str() {
        "hp" => vec![FilterKind::Hp],
        "kalman" => vec![FilterKind::Kalman],
        "both" => vec![FilterKind::Hp, FilterKind::Kalman],
        other => anyhow::bail!("unknown filter {other:?} (expected hp, kalman or both)"),
    };

    let mut computed = Vec::new();
    for filter in &which {
        let gap = gap_series(&cfg, *filter)?;
        let path = out.join(format!("gap_{filter}.csv"));
        write_series_csv(&gap, std::fs::File::create(&path)?)?;
        println!(
            "{filter}: {} quarters {}..{} -> {}",
            gap.len(),
            gap.start,
            gap.end(),
            path.display()
        );
        computed.push((*filter, gap));
    }

    // overlay chart across whatever was computed
    let base = &computed[0].1;
    let labels: Vec<String> = (0..base.len()).map(|i| base.quarter_at(i).to_string()).collect();
    let colors = ["#1f77b4", "#d62728"];
    let names: Vec<String> = computed.iter().map(|(f, _)| format!("{f} gap")).collect();
    let mut series = Vec::new();
    let mut offsets = Vec::new();
    for (i, (_, gap)) in computed.iter().enumerate() {
        series.push(Series {
            label: &names[i],
            values: &gap.values,
            color: colors[i % colors.len()],
        });
        offsets.push(gap.start.quarters_since(&base.start).max(0) as usize);
    }
    let svg = line_chart("Quarterly output gap", &labels, &series, &offsets);
    let svg_path = out.join("output_gaps.svg");
    std::fs::write(&svg_path, svg)?;
    println!("chart -> {}", svg_path.display());
    Ok(())
}
