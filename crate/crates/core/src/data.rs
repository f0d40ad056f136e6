//! Quarterly series ingestion and transforms: FRED-format CSV parsing,
//! rebasing, quarter-on-quarter inflation and the COVID evaluation window.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::quarter::Quarter;

/// First quarter of the COVID episode (the output-gap crash quarter).
pub const COVID_CRASH_QUARTER: Quarter = Quarter::const_new(2020, 1);

/// A gap-free quarterly series. Dates are implied by `start` plus index,
/// which makes the "no missing quarters" invariant structural.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarterlySeries {
    /// Source or provenance identifier (e.g. a FRED series id, "hp_gap").
    pub id: String,
    pub start: Quarter,
    pub values: Vec<f64>,
}

impl QuarterlySeries {
    pub fn new(id: impl Into<String>, start: Quarter, values: Vec<f64>) -> Self {
        QuarterlySeries {
            id: id.into(),
            start,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end(&self) -> Quarter {
        self.start.offset(self.values.len() as i64 - 1)
    }

    pub fn quarter_at(&self, i: usize) -> Quarter {
        self.start.offset(i as i64)
    }

    /// Index of `q` within the series, if covered.
    pub fn index_of(&self, q: &Quarter) -> Option<usize> {
        let d = q.quarters_since(&self.start);
        if d >= 0 && (d as usize) < self.values.len() {
            Some(d as usize)
        } else {
            None
        }
    }

    pub fn value_at(&self, q: &Quarter) -> Option<f64> {
        self.index_of(q).map(|i| self.values[i])
    }

    /// Contiguous sub-series from `from` with `len` quarters.
    pub fn slice(&self, from: Quarter, len: usize) -> Result<QuarterlySeries> {
        let i = self.index_of(&from).ok_or_else(|| {
            CoreError::Series(format!("{} does not cover {}", self.id, from))
        })?;
        if i + len > self.values.len() {
            return Err(CoreError::Series(format!(
                "{}: window {}..{} exceeds series end {}",
                self.id,
                from,
                from.offset(len as i64 - 1),
                self.end()
            )));
        }
        Ok(QuarterlySeries::new(
            self.id.clone(),
            from,
            self.values[i..i + len].to_vec(),
        ))
    }

    /// Element-wise natural log (used for log GDP).
    pub fn ln(&self, id: impl Into<String>) -> Result<QuarterlySeries> {
        if self.values.iter().any(|v| *v <= 0.0) {
            return Err(CoreError::Series(format!(
                "{}: cannot take log of non-positive values",
                self.id
            )));
        }
        Ok(QuarterlySeries::new(
            id,
            self.start,
            self.values.iter().map(|v| v.ln()).collect(),
        ))
    }
}

/// Parse a FRED-style two-column CSV (`observation_date,VALUE`) into a
/// validated quarterly series. Dates must be quarter starts, strictly
/// increasing, gap-free; missing-value markers (`.`) are rejected.
pub fn parse_fred_csv(reader: impl Read) -> Result<QuarterlySeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let id = {
        let headers = rdr
            .headers()
            .map_err(|e| CoreError::MalformedRow { row: 1, msg: e.to_string() })?;
        if headers.len() < 2 {
            return Err(CoreError::MalformedRow {
                row: 1,
                msg: "expected two columns (date, value)".into(),
            });
        }
        headers[1].to_string()
    };

    let mut start: Option<Quarter> = None;
    let mut prev: Option<Quarter> = None;
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2; // 1-based, after header
        let rec = rec.map_err(|e| CoreError::MalformedRow { row, msg: e.to_string() })?;
        if rec.len() < 2 {
            return Err(CoreError::MalformedRow { row, msg: "short row".into() });
        }
        let q = Quarter::from_iso_date(&rec[0])
            .map_err(|e| CoreError::MalformedRow { row, msg: e.to_string() })?;
        let raw = rec[1].trim();
        if raw == "." || raw.is_empty() {
            return Err(CoreError::MalformedRow {
                row,
                msg: "missing-value marker".into(),
            });
        }
        let v: f64 = raw
            .parse()
            .map_err(|_| CoreError::MalformedRow { row, msg: format!("bad value {raw:?}") })?;
        if !v.is_finite() || v <= 0.0 {
            return Err(CoreError::MalformedRow {
                row,
                msg: format!("non-positive level {v}"),
            });
        }
        if let Some(p) = prev {
            let d = q.quarters_since(&p);
            if d == 0 {
                return Err(CoreError::MalformedRow { row, msg: format!("duplicated quarter {q}") });
            }
            if d != 1 {
                return Err(CoreError::MalformedRow {
                    row,
                    msg: format!("non-consecutive quarters {p} -> {q}"),
                });
            }
        } else {
            start = Some(q);
        }
        prev = Some(q);
        values.push(v);
    }
    let start = start.ok_or_else(|| CoreError::Series("empty series".into()))?;
    Ok(QuarterlySeries::new(id, start, values))
}

/// Parse a FRED CSV from a file path.
pub fn parse_fred_csv_file(path: impl AsRef<Path>) -> Result<QuarterlySeries> {
    let f = std::fs::File::open(path.as_ref())?;
    parse_fred_csv(f)
}

/// Rebase an index series so `anchor` maps to exactly 100.
pub fn rebase(series: &QuarterlySeries, anchor: Quarter) -> Result<QuarterlySeries> {
    let base = series
        .value_at(&anchor)
        .ok_or_else(|| CoreError::Series(format!("{}: anchor {} not in series", series.id, anchor)))?;
    if base <= 0.0 {
        return Err(CoreError::Series(format!("{}: non-positive anchor value", series.id)));
    }
    Ok(QuarterlySeries::new(
        series.id.clone(),
        series.start,
        series.values.iter().map(|v| v / base * 100.0).collect(),
    ))
}

/// Quarter-on-quarter inflation, percent: `100*(x_t/x_{t-1} - 1)`, dated at t.
pub fn qoq_inflation(series: &QuarterlySeries) -> Result<QuarterlySeries> {
    if series.len() < 2 {
        return Err(CoreError::Series(format!(
            "{}: need at least 2 observations for inflation",
            series.id
        )));
    }
    if series.values.iter().any(|v| *v <= 0.0) {
        return Err(CoreError::Series(format!("{}: non-positive level", series.id)));
    }
    let values = series
        .values
        .windows(2)
        .map(|w| 100.0 * (w[1] / w[0] - 1.0))
        .collect();
    Ok(QuarterlySeries::new(
        format!("{}_qoq", series.id),
        series.start.next(),
        values,
    ))
}

/// The COVID evaluation window: `len` quarters ending Q1 2024. The default
/// `len = 16` spans Q2 2020..Q1 2024 (the quarters strictly after the Q1 2020
/// crash); `len = 17` additionally includes the crash quarter.
pub fn covid_window(series: &QuarterlySeries, len: usize) -> Result<QuarterlySeries> {
    let end = COVID_CRASH_QUARTER.offset(16); // Q1 2024
    let from = end.offset(-(len as i64) + 1);
    if series.index_of(&from).is_none() || series.index_of(&end).is_none() {
        return Err(CoreError::Series(format!(
            "{}: does not cover the COVID window {}..{}",
            series.id, from, end
        )));
    }
    series.slice(from, len)
}

/// Write a series as a normalized dated CSV (`quarter,value`).
pub fn write_series_csv(series: &QuarterlySeries, w: impl std::io::Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["quarter", &series.id])
        .map_err(|e| CoreError::Series(e.to_string()))?;
    for (i, v) in series.values.iter().enumerate() {
        wtr.write_record([series.quarter_at(i).to_string(), format!("{v:.12e}")])
            .map_err(|e| CoreError::Series(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Read back a normalized dated CSV produced by [`write_series_csv`].
pub fn read_series_csv(r: impl Read) -> Result<QuarterlySeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let id = {
        let headers = rdr
            .headers()
            .map_err(|e| CoreError::MalformedRow { row: 1, msg: e.to_string() })?;
        headers
            .get(1)
            .ok_or_else(|| CoreError::MalformedRow { row: 1, msg: "missing value column".into() })?
            .to_string()
    };
    let mut start = None;
    let mut prev: Option<Quarter> = None;
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| CoreError::MalformedRow { row, msg: e.to_string() })?;
        let q: Quarter = rec[0]
            .parse()
            .map_err(|e: CoreError| CoreError::MalformedRow { row, msg: e.to_string() })?;
        let v: f64 = rec[1]
            .trim()
            .parse()
            .map_err(|_| CoreError::MalformedRow { row, msg: "bad value".into() })?;
        if let Some(p) = prev {
            if q.quarters_since(&p) != 1 {
                return Err(CoreError::MalformedRow { row, msg: "non-consecutive".into() });
            }
        } else {
            start = Some(q);
        }
        prev = Some(q);
        values.push(v);
    }
    let start = start.ok_or_else(|| CoreError::Series("empty series".into()))?;
    Ok(QuarterlySeries::new(id, start, values))
}

/// Download a fresh series CSV from FRED. Network access is opt-in at the CLI
/// level; tests only ever use the bundled snapshot.
pub fn fetch_fred_series(series_id: &str) -> Result<String> {
    let url = format!("https://fred.stlouisfed.org/graph/fredgraph.csv?id={series_id}");
    let body = ureq::get(&url)
        .call()
        .map_err(|e| CoreError::Fetch(e.to_string()))?
        .into_string()
        .map_err(|e| CoreError::Fetch(e.to_string()))?;
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(start: &str, values: &[f64]) -> QuarterlySeries {
        QuarterlySeries::new("test", start.parse().unwrap(), values.to_vec())
    }

    #[test]
    fn parse_valid_csv() {
        let csv = "observation_date,GDP\n2004-01-01,100.0\n2004-04-01,101.0\n2004-07-01,102.5\n";
        let s = parse_fred_csv(csv.as_bytes()).unwrap();
        assert_eq!(s.id, "GDP");
        assert_eq!(s.len(), 3);
        assert_eq!(s.start, "2004Q1".parse().unwrap());
        assert_eq!(s.values[2], 102.5);
    }

    #[test]
    fn parse_rejects_header_only() {
        let csv = "observation_date,GDP\n";
        assert!(matches!(parse_fred_csv(csv.as_bytes()), Err(CoreError::Series(_))));
    }

    #[test]
    fn parse_rejects_duplicate_quarter() {
        let csv = "observation_date,GDP\n2004-01-01,100.0\n2004-02-01,101.0\n";
        let err = parse_fred_csv(csv.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("duplicated"));
    }

    #[test]
    fn parse_rejects_gap_and_missing_marker() {
        let csv = "observation_date,GDP\n2004-01-01,100.0\n2004-10-01,101.0\n";
        assert!(parse_fred_csv(csv.as_bytes()).is_err());
        let csv = "observation_date,GDP\n2004-01-01,100.0\n2004-04-01,.\n";
        let err = parse_fred_csv(csv.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("missing-value"));
    }

    #[test]
    fn rebase_anchor_is_100() {
        let s = series("2010Q1", &[50.0, 55.0, 60.5]);
        let r = rebase(&s, "2010Q2".parse().unwrap()).unwrap();
        assert_eq!(r.values[1], 100.0);
        assert!((r.values[0] - 50.0 / 55.0 * 100.0).abs() < 1e-12);
        // constants all map to 100
        let c = rebase(&series("2010Q1", &[7.0, 7.0, 7.0]), "2010Q1".parse().unwrap()).unwrap();
        assert!(c.values.iter().all(|v| (*v - 100.0).abs() < 1e-12));
        assert!(rebase(&s, "1999Q1".parse().unwrap()).is_err());
    }

    #[test]
    fn rebase_is_idempotent_and_scale_invariant() {
        let s = series("2010Q1", &[50.0, 55.0, 60.5]);
        let anchor: Quarter = "2010Q3".parse().unwrap();
        let once = rebase(&s, anchor).unwrap();
        let twice = rebase(&once, anchor).unwrap();
        for (a, b) in once.values.iter().zip(&twice.values) {
            assert!((a - b).abs() < 1e-12);
        }
        let doubled = series("2010Q1", &[100.0, 110.0, 121.0]);
        let r2 = rebase(&doubled, anchor).unwrap();
        for (a, b) in once.values.iter().zip(&r2.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn inflation_basics() {
        let c = series("2010Q1", &[100.0, 100.0, 100.0]);
        let pi = qoq_inflation(&c).unwrap();
        assert_eq!(pi.len(), 2);
        assert_eq!(pi.start, "2010Q2".parse().unwrap());
        assert!(pi.values.iter().all(|v| v.abs() < 1e-12));

        let d = series("2010Q1", &[100.0, 200.0]);
        let pi = qoq_inflation(&d).unwrap();
        assert!((pi.values[0] - 100.0).abs() < 1e-12);
    }

    #[test]
    fn inflation_invariant_to_rebasing() {
        let s = series("2010Q1", &[88.0, 91.3, 95.2, 97.9, 101.4]);
        let direct = qoq_inflation(&s).unwrap();
        let rebased = qoq_inflation(&rebase(&s, "2010Q4".parse().unwrap()).unwrap()).unwrap();
        for (a, b) in direct.values.iter().zip(&rebased.values) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn covid_window_selection() {
        // 81 quarters 2004Q1..2024Q1
        let vals: Vec<f64> = (0..81).map(|i| i as f64).collect();
        let s = series("2004Q1", &vals);
        let w = covid_window(&s, 16).unwrap();
        assert_eq!(w.len(), 16);
        assert_eq!(w.start, "2020Q2".parse().unwrap());
        assert_eq!(w.end(), "2024Q1".parse().unwrap());
        let w17 = covid_window(&s, 17).unwrap();
        assert_eq!(w17.start, "2020Q1".parse().unwrap());

        // too-short series
        let short = series("2004Q1", &vals[..70]);
        assert!(covid_window(&short, 16).is_err());

        // a series starting later (like the Kalman gap) picks identical dates
        let s2 = series("2004Q2", &vals[1..]);
        let w2 = covid_window(&s2, 16).unwrap();
        assert_eq!(w2.start, w.start);
        assert_eq!(w2.values, w.values);
    }

    #[test]
    fn series_csv_round_trip() {
        let s = series("2004Q1", &[1.5, -2.25, 0.0, 3.125]);
        let mut buf = Vec::new();
        write_series_csv(&s, &mut buf).unwrap();
        let back = read_series_csv(buf.as_slice()).unwrap();
        assert_eq!(back.start, s.start);
        for (a, b) in s.values.iter().zip(&back.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
