//! Structured report records: ordered key/value pairs emitted by tests and
//! commands, serialized as JSON objects for the report command.

use serde_json::{Map, Value};

use crate::error::{CoreError, Result};

/// An ordered key/value report (insertion order preserved in the JSON).
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub title: String,
    entries: Vec<(String, Value)>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report { title: title.into(), entries: Vec::new() }
    }

    pub fn push_f64(&mut self, key: impl Into<String>, v: f64) -> &mut Self {
        self.entries.push((key.into(), json_f64(v)));
        self
    }

    pub fn push_str(&mut self, key: impl Into<String>, v: impl Into<String>) -> &mut Self {
        self.entries.push((key.into(), Value::String(v.into())));
        self
    }

    pub fn push_usize(&mut self, key: impl Into<String>, v: usize) -> &mut Self {
        self.entries.push((key.into(), Value::Number(v.into())));
        self
    }

    pub fn entries(&self) -> &[(String, Value)] {
        &self.entries
    }

    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        map.insert("report".into(), Value::String(self.title.clone()));
        for (k, v) in &self.entries {
            map.insert(k.clone(), v.clone());
        }
        Value::Object(map)
    }

    pub fn write_json(&self, w: impl std::io::Write) -> Result<()> {
        serde_json::to_writer_pretty(w, &self.to_json())
            .map_err(|e| CoreError::Series(e.to_string()))
    }
}

/// JSON has no Infinity/NaN; encode those as strings so reports stay valid.
fn json_f64(v: f64) -> Value {
    if v.is_finite() {
        serde_json::Number::from_f64(v)
            .map(Value::Number)
            .unwrap_or_else(|| Value::String(v.to_string()))
    } else {
        Value::String(v.to_string())
    }
}
