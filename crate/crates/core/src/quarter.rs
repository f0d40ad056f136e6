use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// A calendar quarter, e.g. `2020Q1`.
///
/// Ordered chronologically; arithmetic is in whole quarters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Quarter {
    year: i32,
    /// 1..=4
    q: u8,
}

impl Quarter {
    pub fn new(year: i32, q: u8) -> Result<Self, CoreError> {
        if !(1..=4).contains(&q) {
            return Err(CoreError::InvalidInput(format!(
                "quarter must be 1..=4, got {q}"
            )));
        }
        Ok(Quarter { year, q })
    }

    /// Const constructor for compile-time anchors. Panics on invalid `q`.
    pub const fn const_new(year: i32, q: u8) -> Self {
        assert!(q >= 1 && q <= 4);
        Quarter { year, q }
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn quarter(&self) -> u8 {
        self.q
    }

    /// Quarter containing the given month (1..=12).
    pub fn from_year_month(year: i32, month: u8) -> Result<Self, CoreError> {
        if !(1..=12).contains(&month) {
            return Err(CoreError::InvalidInput(format!("bad month {month}")));
        }
        Quarter::new(year, (month - 1) / 3 + 1)
    }

    /// Parse an ISO date like `2020-04-01` to its quarter.
    pub fn from_iso_date(s: &str) -> Result<Self, CoreError> {
        let parts: Vec<&str> = s.trim().split('-').collect();
        if parts.len() != 3 {
            return Err(CoreError::InvalidInput(format!("bad date {s:?}")));
        }
        let year: i32 = parts[0]
            .parse()
            .map_err(|_| CoreError::InvalidInput(format!("bad year in {s:?}")))?;
        let month: u8 = parts[1]
            .parse()
            .map_err(|_| CoreError::InvalidInput(format!("bad month in {s:?}")))?;
        Quarter::from_year_month(year, month)
    }

    pub fn next(&self) -> Quarter {
        self.offset(1)
    }

    /// Quarter shifted by `n` quarters (negative allowed).
    pub fn offset(&self, n: i64) -> Quarter {
        let idx = self.year as i64 * 4 + (self.q as i64 - 1) + n;
        Quarter {
            year: idx.div_euclid(4) as i32,
            q: (idx.rem_euclid(4) + 1) as u8,
        }
    }

    /// Signed number of quarters from `other` to `self`.
    pub fn quarters_since(&self, other: &Quarter) -> i64 {
        (self.year as i64 * 4 + self.q as i64) - (other.year as i64 * 4 + other.q as i64)
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.q)
    }
}

impl FromStr for Quarter {
    type Err = CoreError;

    /// Accepts `2020Q1` / `2020q1` or an ISO date.
    fn from_str(s: &str) -> Result<Self, CoreError> {
        let s = s.trim();
        if let Some(pos) = s.find(['Q', 'q']) {
            let year: i32 = s[..pos]
                .parse()
                .map_err(|_| CoreError::InvalidInput(format!("bad quarter label {s:?}")))?;
            let q: u8 = s[pos + 1..]
                .parse()
                .map_err(|_| CoreError::InvalidInput(format!("bad quarter label {s:?}")))?;
            Quarter::new(year, q)
        } else {
            Quarter::from_iso_date(s)
        }
    }
}

impl TryFrom<String> for Quarter {
    type Error = CoreError;
    fn try_from(s: String) -> Result<Self, CoreError> {
        s.parse()
    }
}

impl From<Quarter> for String {
    fn from(q: Quarter) -> String {
        q.to_string()
    }
}
