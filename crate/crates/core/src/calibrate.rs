//! Grid search over (eta1, rho_eps, rho_eta) minimizing the Mahalanobis
//! distance between simulated and empirical window means, with a
//! deterministic reduction, a worker pool and append-only checkpointing.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::StructuralParams;
use crate::simulate::{
    extract_window, simulate_behavioral_horizon, simulate_rational_horizon, ShockScenario,
    SimConfig,
};
use crate::stats::{mahalanobis, MahalanobisSpec};

/// One axis of the search grid: inclusive [min, max] with a fixed step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, step: f64) -> Self {
        AxisSpec { min, max, step }
    }

    pub fn count(&self) -> Result<usize> {
        if !self.step.is_finite() || self.step <= 0.0 || self.max < self.min {
            return Err(CoreError::InvalidParameter("bad axis spec".into()));
        }
        let span = (self.max - self.min) / self.step;
        let k = span.round();
        if (span - k).abs() > 1e-9 {
            return Err(CoreError::InvalidParameter(format!(
                "step {} does not divide range [{}, {}]",
                self.step, self.min, self.max
            )));
        }
        Ok(k as usize + 1)
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }
}

/// The search grid plus the number of stochastic runs averaged per point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub eta1: AxisSpec,
    pub rho_eps: AxisSpec,
    pub rho_eta: AxisSpec,
    pub seeds_per_point: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            eta1: AxisSpec::new(0.0, 1.0, 0.01),
            rho_eps: AxisSpec::new(0.0, 1.0, 0.05),
            rho_eta: AxisSpec::new(0.0, 1.0, 0.05),
            seeds_per_point: 1,
        }
    }
}

impl GridSpec {
    pub fn total_points(&self) -> Result<usize> {
        Ok(self.eta1.count()? * self.rho_eps.count()? * self.rho_eta.count()?)
    }

    /// Grid point by lexicographic index (eta1 outermost).
    pub fn point(&self, idx: usize) -> Result<GridPoint> {
        let ne = self.rho_eps.count()?;
        let nn = self.rho_eta.count()?;
        let i_eta1 = idx / (ne * nn);
        let rem = idx % (ne * nn);
        Ok(GridPoint {
            eta1: self.eta1.value(i_eta1),
            rho_eps: self.rho_eps.value(rem / nn),
            rho_eta: self.rho_eta.value(rem % nn),
        })
    }

    /// Stable fingerprint of the grid definition used to guard checkpoints.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::new();
        for a in [&self.eta1, &self.rho_eps, &self.rho_eta] {
            h.write_f64(a.min);
            h.write_f64(a.max);
            h.write_f64(a.step);
        }
        h.write_u64(self.seeds_per_point as u64);
        h.finish()
    }
}

/// Candidate (eta1, rho_eps, rho_eta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub eta1: f64,
    pub rho_eps: f64,
    pub rho_eta: f64,
}

/// Which expectation regime the grid evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Behavioral,
    Rational,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::Behavioral => write!(f, "behavioral"),
            ModelKind::Rational => write!(f, "rational"),
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub point: GridPoint,
    pub mean_y: f64,
    pub mean_pi: f64,
    /// Ranking distance (infinite for failed points).
    pub distance: f64,
    /// Failure tag when the point could not be simulated.
    pub diagnostic: Option<String>,
}

/// Everything a worker needs to evaluate points.
#[derive(Debug, Clone)]
pub struct CalibrationContext {
    pub model: ModelKind,
    /// Pinned initial demand shock (not searched).
    pub eps1: f64,
    /// Empirical (mean gap, mean inflation) target.
    pub data_means: [f64; 2],
    /// Actual data windows backing the paired-series covariance.
    pub gap_window: Vec<f64>,
    pub infl_window: Vec<f64>,
    pub params: StructuralParams,
    /// Scenario template providing timing fields (t0, offsets, durations).
    pub scenario: ShockScenario,
    pub sim: SimConfig,
    pub mspec: MahalanobisSpec,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic per-run seed from (base seed, point index, seed index).
pub fn point_seed(base: u64, point_index: usize, seed_index: usize) -> u64 {
    splitmix64(base ^ splitmix64(point_index as u64).wrapping_add(seed_index as u64))
}

/// Evaluate one grid point: simulate `seeds_per_point` runs, average the
/// evaluation-window means across runs, and score the distance to the data
/// means. Simulation failures yield an infinite distance with a diagnostic
/// rather than an error.
pub fn evaluate_point(
    point: GridPoint,
    point_index: usize,
    seeds_per_point: usize,
    ctx: &CalibrationContext,
) -> CalibrationResult {
    let scenario = ShockScenario {
        eps1: ctx.eps1,
        eta1: point.eta1,
        rho_eps: point.rho_eps,
        rho_eta: point.rho_eta,
        ..ctx.scenario
    };
    let horizon = scenario.t0 + ctx.sim.window_len;
    let runs = seeds_per_point.max(1);
    let mut sum_y = 0.0;
    let mut sum_pi = 0.0;
    for j in 0..runs {
        let cfg = SimConfig {
            seed: point_seed(ctx.sim.seed, point_index, j),
            ..ctx.sim
        };
        let sim = match ctx.model {
            ModelKind::Behavioral => simulate_behavioral_horizon(&ctx.params, &scenario, &cfg, horizon),
            ModelKind::Rational => simulate_rational_horizon(&ctx.params, &scenario, &cfg, horizon),
        };
        let path = match sim {
            Ok(p) => p,
            Err(e) => {
                return CalibrationResult {
                    point,
                    mean_y: f64::NAN,
                    mean_pi: f64::NAN,
                    distance: f64::INFINITY,
                    diagnostic: Some(e.to_string()),
                }
            }
        };
        let (yw, pw) = match extract_window(&path, scenario.t0, ctx.sim.window_len) {
            Ok(w) => w,
            Err(e) => {
                return CalibrationResult {
                    point,
                    mean_y: f64::NAN,
                    mean_pi: f64::NAN,
                    distance: f64::INFINITY,
                    diagnostic: Some(e.to_string()),
                }
            }
        };
        sum_y += yw.iter().sum::<f64>() / yw.len() as f64;
        sum_pi += pw.iter().sum::<f64>() / pw.len() as f64;
    }
    let mean_y = sum_y / runs as f64;
    let mean_pi = sum_pi / runs as f64;
    if !mean_y.is_finite() || !mean_pi.is_finite() {
        return CalibrationResult {
            point,
            mean_y,
            mean_pi,
            distance: f64::INFINITY,
            diagnostic: Some("non-finite window means".into()),
        };
    }
    match mahalanobis(
        [mean_y, mean_pi],
        ctx.data_means,
        Some((&ctx.gap_window, &ctx.infl_window)),
        &ctx.mspec,
    ) {
        Ok(d) => CalibrationResult { point, mean_y, mean_pi, distance: d, diagnostic: None },
        Err(e) => CalibrationResult {
            point,
            mean_y,
            mean_pi,
            distance: f64::INFINITY,
            diagnostic: Some(e.to_string()),
        },
    }
}

/// Full grid outcome: per-point results in grid order plus the ranking.
#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub results: Vec<CalibrationResult>,
    /// Indices into `results`, ascending by (distance, point).
    pub ranking: Vec<usize>,
}

impl GridOutcome {
    pub fn best(&self) -> &CalibrationResult {
        &self.results[self.ranking[0]]
    }
}

fn rank_key(r: &CalibrationResult) -> (f64, f64, f64, f64) {
    (r.distance, r.point.eta1, r.point.rho_eps, r.point.rho_eta)
}

fn build_ranking(results: &[CalibrationResult]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..results.len()).collect();
    idx.sort_by(|&a, &b| {
        let (da, ea, ra, na) = rank_key(&results[a]);
        let (db, eb, rb, nb) = rank_key(&results[b]);
        da.total_cmp(&db)
            .then(ea.total_cmp(&eb))
            .then(ra.total_cmp(&rb))
            .then(na.total_cmp(&nb))
    });
    idx
}

/// Evaluate every grid point with `jobs` worker threads. The reduction is a
/// placement-by-index fold, so the outcome is independent of scheduling; a
/// checkpoint file (header + fixed-width records) enables interrupt/resume
/// with a byte-identical results table.
pub fn run_grid(
    grid: &GridSpec,
    ctx: &CalibrationContext,
    jobs: usize,
    checkpoint: Option<&Path>,
) -> Result<GridOutcome> {
    let total = grid.total_points()?;
    if total == 0 {
        return Err(CoreError::InvalidParameter("empty grid".into()));
    }
    let mut results: Vec<Option<CalibrationResult>> = vec![None; total];

    let mut ckpt_file = match checkpoint {
        Some(path) => Some(open_checkpoint(path, grid, ctx, &mut results)?),
        None => None,
    };

    let pending: Vec<usize> = (0..total).filter(|i| results[*i].is_none()).collect();
    let jobs = jobs.max(1).min(pending.len().max(1));

    if !pending.is_empty() {
        let next = AtomicUsize::new(0);
        let (tx, rx) = mpsc::channel::<(usize, CalibrationResult)>();
        std::thread::scope(|scope| -> Result<()> {
            for _ in 0..jobs {
                let tx = tx.clone();
                let pending = &pending;
                let next = &next;
                scope.spawn(move || loop {
                    let k = next.fetch_add(1, Ordering::Relaxed);
                    if k >= pending.len() {
                        break;
                    }
                    let idx = pending[k];
                    let point = grid.point(idx).expect("index in range");
                    let res = evaluate_point(point, idx, grid.seeds_per_point, ctx);
                    if tx.send((idx, res)).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            for (idx, res) in rx {
                if let Some(f) = ckpt_file.as_mut() {
                    append_record(f, idx, &res)?;
                }
                results[idx] = Some(res);
            }
            Ok(())
        })?;
    }

    let results: Vec<CalibrationResult> = results
        .into_iter()
        .map(|r| r.expect("all points evaluated"))
        .collect();
    let ranking = build_ranking(&results);
    Ok(GridOutcome { results, ranking })
}

/// Results table as CSV in grid order (deterministic bytes).
pub fn write_results_csv(outcome: &GridOutcome, w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["eta1", "rho_eps", "rho_eta", "mean_y", "mean_pi", "distance"])
        .map_err(|e| CoreError::Series(e.to_string()))?;
    for r in &outcome.results {
        wtr.write_record([
            format!("{:.6}", r.point.eta1),
            format!("{:.6}", r.point.rho_eps),
            format!("{:.6}", r.point.rho_eta),
            format!("{:.12e}", r.mean_y),
            format!("{:.12e}", r.mean_pi),
            format!("{:.12e}", r.distance),
        ])
        .map_err(|e| CoreError::Series(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

// ---- checkpoint format ----
//
// line 1: "nksim-checkpoint v1 grid=<16hex> seed=<u64> model=<kind> eps1=<16hex>\n"
// records: "<idx:08> <y:016x> <pi:016x> <d:016x>\n"  (f64 bit patterns)

fn header_line(grid: &GridSpec, ctx: &CalibrationContext) -> String {
    format!(
        "nksim-checkpoint v1 grid={:016x} seed={} model={} eps1={:016x}\n",
        grid.fingerprint(),
        ctx.sim.seed,
        ctx.model,
        ctx.eps1.to_bits()
    )
}

fn open_checkpoint(
    path: &Path,
    grid: &GridSpec,
    ctx: &CalibrationContext,
    results: &mut [Option<CalibrationResult>],
) -> Result<File> {
    let expected = header_line(grid, ctx);
    if path.exists() {
        let f = File::open(path)?;
        let mut lines = BufReader::new(f).lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| CoreError::Checkpoint("empty checkpoint file".into()))?;
        if header.trim_end() != expected.trim_end() {
            return Err(CoreError::Checkpoint(format!(
                "checkpoint header mismatch: found {header:?}"
            )));
        }
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (idx, res) = parse_record(&line, grid).map_err(|e| {
                CoreError::Checkpoint(format!("record {} corrupt: {e}", lineno + 2))
            })?;
            results[idx] = Some(res);
        }
        OpenOptions::new().append(true).open(path).map_err(Into::into)
    } else {
        let mut f = File::create(path)?;
        f.write_all(expected.as_bytes())?;
        Ok(f)
    }
}

fn append_record(f: &mut File, idx: usize, r: &CalibrationResult) -> Result<()> {
    let line = format!(
        "{:08} {:016x} {:016x} {:016x}\n",
        idx,
        r.mean_y.to_bits(),
        r.mean_pi.to_bits(),
        r.distance.to_bits()
    );
    f.write_all(line.as_bytes())?;
    Ok(())
}

fn parse_record(line: &str, grid: &GridSpec) -> Result<(usize, CalibrationResult)> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 4 {
        return Err(CoreError::Checkpoint("wrong field count".into()));
    }
    let idx: usize = parts[0]
        .parse()
        .map_err(|_| CoreError::Checkpoint("bad index".into()))?;
    if idx >= grid.total_points()? {
        return Err(CoreError::Checkpoint("index out of range".into()));
    }
    let bits = |s: &str| -> Result<f64> {
        u64::from_str_radix(s, 16)
            .map(f64::from_bits)
            .map_err(|_| CoreError::Checkpoint("bad f64 bits".into()))
    };
    let mean_y = bits(parts[1])?;
    let mean_pi = bits(parts[2])?;
    let distance = bits(parts[3])?;
    let diagnostic = if distance.is_infinite() { Some("restored failed point".into()) } else { None };
    Ok((
        idx,
        CalibrationResult { point: grid.point(idx)?, mean_y, mean_pi, distance, diagnostic },
    ))
}

/// FNV-1a 64-bit.
struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf29ce484222325)
    }
    fn write_u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x100000001b3);
        }
    }
    fn write_f64(&mut self, v: f64) {
        self.write_u64(v.to_bits());
    }
    fn finish(&self) -> u64 {
        self.0
    }
}
