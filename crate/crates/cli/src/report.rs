use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA: &str = "nsamg-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    SkippedHypothesis,
}

/// One check. Failed comparisons always carry `lhs` and `rhs`; a failure
/// without them records an evaluation error in `note`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    pub status: Status,
    /// The identity or bound being checked.
    pub anchor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Record {
    fn new(name: impl Into<String>, anchor: impl Into<String>, status: Status) -> Self {
        Self {
            name: name.into(),
            status,
            anchor: anchor.into(),
            lhs: None,
            rhs: None,
            tolerance: None,
            values: BTreeMap::new(),
            note: None,
        }
    }

    fn compared(
        name: impl Into<String>,
        anchor: impl Into<String>,
        pass: bool,
        lhs: f64,
        rhs: f64,
        tol: f64,
    ) -> Self {
        let mut r = Self::new(name, anchor, if pass { Status::Pass } else { Status::Fail });
        r.lhs = Some(lhs);
        r.rhs = Some(rhs);
        r.tolerance = Some(tol);
        r
    }

    /// `|lhs − rhs| ≤ tol`.
    pub fn close(
        name: impl Into<String>,
        anchor: impl Into<String>,
        lhs: f64,
        rhs: f64,
        tol: f64,
    ) -> Self {
        Self::compared(name, anchor, (lhs - rhs).abs() <= tol, lhs, rhs, tol)
    }

    /// `lhs ≤ rhs + tol`.
    pub fn at_most(
        name: impl Into<String>,
        anchor: impl Into<String>,
        lhs: f64,
        rhs: f64,
        tol: f64,
    ) -> Self {
        Self::compared(name, anchor, lhs <= rhs + tol, lhs, rhs, tol)
    }

    /// All `quantities` agree pairwise within `tol`; `lhs`/`rhs` hold the
    /// most distant pair.
    pub fn agree(
        name: impl Into<String>,
        anchor: impl Into<String>,
        quantities: &[(&str, f64)],
        tol: f64,
    ) -> Self {
        let (mut lo, mut hi) = (0, 0);
        for (i, (_, x)) in quantities.iter().enumerate() {
            if x.is_nan() || *x < quantities[lo].1 {
                lo = i;
            }
            if x.is_nan() || *x > quantities[hi].1 {
                hi = i;
            }
        }
        let (a, b) = (quantities[hi].1, quantities[lo].1);
        let mut r = Self::close(name, anchor, a, b, tol);
        for (k, v) in quantities {
            r.values.insert((*k).to_string(), *v);
        }
        r
    }

    pub fn skipped(
        name: impl Into<String>,
        anchor: impl Into<String>,
        reason: impl Into<String>,
    ) -> Self {
        Self::new(name, anchor, Status::SkippedHypothesis).note(reason)
    }

    pub fn error(
        name: impl Into<String>,
        anchor: impl Into<String>,
        err: impl std::fmt::Display,
    ) -> Self {
        Self::new(name, anchor, Status::Fail).note(format!("error: {err}"))
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.values.insert(key.to_string(), value);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub skipped_hypothesis: usize,
}

impl Summary {
    pub fn of(records: &[Record]) -> Self {
        let mut s = Summary {
            total: records.len(),
            ..Default::default()
        };
        for r in records {
            match r.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::SkippedHypothesis => s.skipped_hypothesis += 1,
            }
        }
        s
    }
}

/// The only part of a report that changes between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timestamp {
    pub generated_at: String,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub parameters: serde_json::Value,
    pub summary: Summary,
    pub records: Vec<Record>,
    pub timestamp: Timestamp,
}

impl Report {
    pub fn new(
        command: impl Into<String>,
        parameters: serde_json::Value,
        mut records: Vec<Record>,
        runtime: Duration,
    ) -> Self {
        records.sort_by(|a, b| a.name.cmp(&b.name));
        Self {
            schema: SCHEMA.to_string(),
            command: command.into(),
            parameters,
            summary: Summary::of(&records),
            records,
            timestamp: Timestamp {
                generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                runtime_seconds: runtime.as_secs_f64(),
            },
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn exit_code(&self) -> u8 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| r.status == Status::Fail)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per record: name, status, lhs, rhs, tolerance.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Output(e.to_string()))?;
        w.write_record(["name", "status", "lhs", "rhs", "tolerance"])
            .map_err(|e| CliError::Output(e.to_string()))?;
        let num = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        for r in &self.records {
            let status = match r.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::SkippedHypothesis => "skipped-hypothesis",
            };
            w.write_record([
                r.name.as_str(),
                status,
                &num(r.lhs),
                &num(r.rhs),
                &num(r.tolerance),
            ])
            .map_err(|e| CliError::Output(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}
