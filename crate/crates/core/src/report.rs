//! Check reports and their JSON and text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermMax {
    pub name: String,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Worst {
    pub index: Vec<usize>,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub tag: String,
    pub suite: String,
    pub status: Status,
    pub informational: bool,
    pub max_residual: Option<f64>,
    pub points: usize,
    pub tuples: usize,
    pub terms: Vec<TermMax>,
    pub worst: Option<Worst>,
    pub flags: Vec<String>,
    pub error: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// True when this result makes the run fail.
    pub fn blocking(&self) -> bool {
        !self.informational && matches!(self.status, Status::Fail | Status::Error)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub model: Option<String>,
    pub model_hash: String,
    pub seed: u64,
    pub points: usize,
    pub tol: f64,
    pub suites: Vec<String>,
    pub verdicts: BTreeMap<String, String>,
    pub diagnostics: BTreeMap<String, f64>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl Report {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model     {}", self.model.as_deref().unwrap_or("(unnamed)"));
        let _ = writeln!(out, "sha256    {}", self.model_hash);
        let _ = writeln!(out, "sampling  seed {} points {} tol {:e}", self.seed, self.points, self.tol);
        let _ = writeln!(out);
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Error => "ERROR",
                Status::Skipped => "SKIP",
            };
            let info = if c.informational { " (info)" } else { "" };
            let residual = c.max_residual.map_or_else(|| "-".to_string(), |r| format!("{r:.3e}"));
            let _ = writeln!(out, "{status:<5} {:<9} {:<26} {:>10}  [{}]{info}", c.suite, c.name, residual, c.tag);
            if let Some(e) = &c.error {
                let _ = writeln!(out, "      {e}");
            }
            for f in &c.flags {
                let _ = writeln!(out, "      note: {f}");
            }
        }
        if !self.diagnostics.is_empty() {
            let _ = writeln!(out);
            for (k, v) in &self.diagnostics {
                let _ = writeln!(out, "{k:<28} {v:.6e}");
            }
        }
        let _ = writeln!(out);
        for (k, v) in &self.verdicts {
            let _ = writeln!(out, "{k:<28} {v}");
        }
        let _ = writeln!(out, "{:<28} {}", "result", if self.passed { "pass" } else { "fail" });
        out
    }
}
