use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::checks::{plan, Context};
use crate::config::{ConfigError, PelInstanceConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Paper,
    Trivial,
    Derived,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expected {
    pub value: Value,
    pub provenance: Provenance,
}

/// What a check returns before timing and naming.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub computed: Value,
    pub expected: Expected,
    pub tolerance: f64,
    /// None when the check could not be evaluated.
    pub deviation: Option<f64>,
    pub skip: Option<String>,
    pub detail: String,
}

impl Outcome {
    pub fn measured(computed: Value, expected: Value, provenance: Provenance, tolerance: f64, deviation: f64) -> Self {
        Self { computed, expected: Expected { value: expected, provenance }, tolerance, deviation: Some(deviation), skip: None, detail: String::new() }
    }

    pub fn exact(computed: Value, expected: Value, provenance: Provenance, deviation: f64) -> Self {
        Self::measured(computed, expected, provenance, 0.0, deviation)
    }

    pub fn skipped(reason: impl Into<String>, provenance: Provenance) -> Self {
        let reason = reason.into();
        Self {
            computed: Value::Null,
            expected: Expected { value: Value::Null, provenance },
            tolerance: 0.0,
            deviation: None,
            skip: Some(reason.clone()),
            detail: reason,
        }
    }

    pub fn error(message: impl Into<String>) -> Self {
        Self {
            computed: Value::Null,
            expected: Expected { value: Value::Null, provenance: Provenance::Derived },
            tolerance: 0.0,
            deviation: None,
            skip: None,
            detail: message.into(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn status(&self) -> Status {
        if self.skip.is_some() {
            return Status::Skipped;
        }
        match self.deviation {
            Some(d) if d <= self.tolerance => Status::Pass,
            _ => Status::Fail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub status: Status,
    pub computed: Value,
    pub expected: Expected,
    pub tolerance: f64,
    pub deviation: Option<f64>,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub instance: String,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.summary.failed == 0 {
            0
        } else {
            1
        }
    }

    /// The report with timings removed; equal configs and seeds give equal bodies.
    pub fn body(&self) -> Self {
        let mut out = self.clone();
        for c in &mut out.checks {
            c.elapsed_ms = None;
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values are serialisable")
    }

    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut s = format!("{:<7} {:<width$} {:>12} {:>10}  detail\n", "status", "check", "deviation", "tolerance");
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Skipped => "skip",
            };
            let dev = c.deviation.map_or("-".to_string(), |d| format!("{d:.3e}"));
            s += &format!("{:<7} {:<width$} {:>12} {:>10.1e}  {}\n", status, c.name, dev, c.tolerance, c.detail);
        }
        let m = &self.summary;
        s += &format!("{} checks: {} passed, {} failed, {} skipped\n", m.total, m.passed, m.failed, m.skipped);
        s
    }
}

/// Runs every planned check whose name matches `only`, in plan order, and
/// assembles the report sorted by name.
pub fn run(cfg: &PelInstanceConfig, only: Option<&glob::Pattern>) -> Result<Report, ConfigError> {
    cfg.validate()?;
    let ctx = Context::new(cfg)?;
    let mut checks = Vec::new();
    for planned in plan(cfg) {
        if only.is_some_and(|g| !g.matches(&planned.name)) {
            continue;
        }
        let start = Instant::now();
        let o = (planned.run)(&ctx);
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        checks.push(CheckReport {
            name: planned.name,
            status: o.status(),
            computed: o.computed,
            expected: o.expected,
            tolerance: o.tolerance,
            deviation: o.deviation,
            detail: o.detail,
            elapsed_ms: Some(elapsed),
        });
    }
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
    let (passed, failed, skipped) = (count(Status::Pass), count(Status::Fail), count(Status::Skipped));
    let summary = Summary { total: checks.len(), passed, failed, skipped, status: if failed == 0 { Status::Pass } else { Status::Fail } };
    Ok(Report { schema_version: SCHEMA_VERSION, instance: cfg.name.clone(), seed: cfg.seed, samples: cfg.samples, checks, summary })
}
