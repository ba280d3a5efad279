use std::fmt::Write as _;

use ncjoin_core::{Check, ValidationReport};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub args: Vec<String>,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub summary: Vec<String>,
    #[serde(default)]
    pub artifacts: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str, args: &[String]) -> Self {
        Self {
            command: command.to_string(),
            args: args.to_vec(),
            passed: true,
            checks: Vec::new(),
            summary: Vec::new(),
            artifacts: Map::new(),
        }
    }

    pub fn add_checks(&mut self, report: ValidationReport) {
        self.checks.extend(report.checks);
        self.refresh();
    }

    pub fn flag(&mut self, name: &str, passed: bool, residual: f64, detail: Option<String>) {
        let residual = if residual.is_nan() { f64::MAX } else { residual.clamp(-f64::MAX, f64::MAX) };
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            residual,
            detail,
        });
        self.refresh();
    }

    pub fn artifact(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("artifacts serialize");
        self.artifacts.insert(key.to_string(), v);
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.summary.push(text.into());
    }

    fn refresh(&mut self) {
        self.passed = self.checks.iter().all(|c| c.passed);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "ncjoin {} {}", self.command, self.args.join(" "));
        let report = ValidationReport {
            checks: self.checks.clone(),
        };
        out.push_str(&report.to_string());
        for s in &self.summary {
            let _ = writeln!(out, "{s}");
        }
        let _ = writeln!(out, "{}", if self.passed { "PASS" } else { "FAIL" });
        out
    }
}
