//! Machine-readable verification reports.
//!
//! A report is deterministic for fixed inputs except for `wall_time`: cases keep
//! insertion order and the residual map is sorted by name.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

/// One checked identity with its threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseResult {
    pub name: String,
    /// `None` when the case could not be evaluated.
    pub residual: Option<f64>,
    pub threshold: f64,
    pub passed: bool,
    pub detail: Value,
}

impl CaseResult {
    pub fn new(name: impl Into<String>, residual: f64, threshold: f64, detail: Value) -> Self {
        let passed = residual.is_finite() && residual <= threshold;
        CaseResult { name: name.into(), residual: residual.is_finite().then_some(residual), threshold, passed, detail }
    }

    /// A case that failed to evaluate; the error goes into `detail`.
    pub fn error(name: impl Into<String>, threshold: f64, err: impl std::fmt::Display) -> Self {
        CaseResult {
            name: name.into(),
            residual: None,
            threshold,
            passed: false,
            detail: Value::String(err.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub params: Value,
    pub results: Vec<CaseResult>,
    pub residuals: BTreeMap<String, Option<f64>>,
    pub diagnostics: Vec<String>,
    /// Seconds; the only nondeterministic field.
    pub wall_time: f64,
}

impl Report {
    pub fn new(suite: impl Into<String>, params: Value) -> Self {
        Report {
            suite: suite.into(),
            params,
            results: Vec::new(),
            residuals: BTreeMap::new(),
            diagnostics: Vec::new(),
            wall_time: 0.0,
        }
    }

    pub fn push(&mut self, case: CaseResult) {
        self.residuals.insert(case.name.clone(), case.residual);
        self.results.push(case);
    }

    pub fn extend(&mut self, other: Report) {
        for case in other.results {
            self.push(case);
        }
        self.diagnostics.extend(other.diagnostics);
    }

    pub fn passed(&self) -> bool {
        self.results.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseResult> {
        self.results.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values serialize")
    }

    /// One row per case: `name,residual,threshold,passed`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,residual,threshold,passed\n");
        for c in &self.results {
            let residual = c.residual.map(|r| format!("{r:e}")).unwrap_or_default();
            let _ = writeln!(out, "{},{},{:e},{}", csv_field(&c.name), residual, c.threshold, c.passed);
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
