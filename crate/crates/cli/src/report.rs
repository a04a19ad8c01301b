//! Run reports.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        })
    }
}

/// One named check with its measured values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub measured: BTreeMap<String, f64>,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ({:.2} s)", self.status, self.name, self.seconds)?;
        for (k, v) in &self.measured {
            write!(f, " {k}={v:.3e}")?;
        }
        if !self.detail.is_empty() {
            write!(f, " | {}", self.detail)?;
        }
        Ok(())
    }
}

/// Collects measurements for a check while it runs.
#[derive(Debug)]
pub struct CheckBuilder {
    name: String,
    start: Instant,
    measured: BTreeMap<String, f64>,
    notes: Vec<String>,
    failed: bool,
}

impl CheckBuilder {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            start: Instant::now(),
            measured: BTreeMap::new(),
            notes: Vec::new(),
            failed: false,
        }
    }

    pub fn measure(&mut self, key: impl Into<String>, value: f64) {
        self.measured.insert(key.into(), value);
    }

    /// Records `value` and fails the check unless `ok`.
    pub fn require(&mut self, key: impl Into<String>, value: f64, ok: bool) {
        let key = key.into();
        if !ok {
            self.failed = true;
            self.notes.push(format!("{key} out of bounds"));
        }
        self.measured.insert(key, value);
    }

    pub fn fail(&mut self, note: impl Into<String>) {
        self.failed = true;
        self.notes.push(note.into());
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn finish(self) -> CheckResult {
        CheckResult {
            status: if self.failed { Status::Fail } else { Status::Pass },
            name: self.name,
            measured: self.measured,
            detail: self.notes.join("; "),
            seconds: self.start.elapsed().as_secs_f64(),
        }
    }

    pub fn skip(self, reason: &str) -> CheckResult {
        CheckResult {
            status: Status::Skipped,
            name: self.name,
            measured: self.measured,
            detail: format!("skipped ({reason})"),
            seconds: self.start.elapsed().as_secs_f64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOutcome {
    pub converged: bool,
    pub lambda: Option<f64>,
    pub lambda_1: f64,
    pub c: Option<f64>,
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
    pub max_u: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeBoundarySummary {
    pub points: usize,
    pub chains: usize,
    pub crossing_cells: usize,
    pub degenerate_cells: usize,
    pub regular_by_gradient: usize,
    pub gradient_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: ExperimentConfig,
    pub solver: Option<SolverOutcome>,
    pub free_boundary: Option<FreeBoundarySummary>,
    pub checks: Vec<CheckResult>,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            command: command.into(),
            config: config.clone(),
            solver: None,
            free_boundary: None,
            checks: Vec::new(),
            timings: BTreeMap::new(),
        }
    }

    /// Runs `f`, recording its duration under `stage`.
    pub fn timed<R>(&mut self, stage: &str, f: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let out = f();
        self.timings.insert(stage.into(), start.elapsed().as_secs_f64());
        out
    }

    pub fn passed(&self) -> bool {
        self.solver.as_ref().is_none_or(|s| s.converged) && self.checks.iter().all(CheckResult::passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_tracks_failures() {
        let mut b = CheckBuilder::new("demo");
        b.require("err", 1e-12, true);
        let ok = b.finish();
        assert_eq!(ok.status, Status::Pass);
        let mut b = CheckBuilder::new("demo");
        b.require("err", 1.0, false);
        let bad = b.finish();
        assert_eq!(bad.status, Status::Fail);
        assert!(bad.detail.contains("err"));
        assert!(bad.to_string().starts_with("FAIL demo"));
        assert_eq!(CheckBuilder::new("x").skip("no").status, Status::Skipped);
    }
}
