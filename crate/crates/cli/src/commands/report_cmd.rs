use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use crate::config::RunConfig;

/// Summarize the JSON reports accumulated in the output directory.
#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory to scan (default: configured output dir).
    #[arg(long)]
    pub dir: Option<PathBuf>,
}

pub fn run(cfg: RunConfig, args: ReportArgs) -> Result<()> {
    let dir = args.dir.unwrap_or(cfg.output.dir);
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    anyhow::ensure!(!files.is_empty(), "no JSON reports in {}", dir.display());

    for path in files {
        let text = std::fs::read_to_string(&path)?;
        let value: serde_json::Value = match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("skipping {}: {e}", path.display());
                continue;
            }
        };
        let title = value
            .get("report")
            .and_then(|v| v.as_str())
            .unwrap_or("unknown");
        println!("== {} ({})", title, path.file_name().unwrap().to_string_lossy());
        if let Some(map) = value.as_object() {
            for (k, v) in map {
                if k == "report" {
                    continue;
                }
                println!("   {k:<24} {v}");
            }
        }
    }
    Ok(())
}
