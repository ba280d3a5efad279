//! Fixture runner. Each `fixtures/<name>/expect.json` lists command runs,
//! their exit codes and JSON-pointer expectations on the report.

use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::{execute, Context, Report};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Expect {
    pointer: String,
    #[serde(default)]
    equals: Option<Value>,
    #[serde(default)]
    approx: Option<f64>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    at_most: Option<f64>,
    #[serde(default)]
    at_least: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Run {
    args: Vec<String>,
    exit: i32,
    #[serde(default)]
    expect: Vec<Expect>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureFile {
    runs: Vec<Run>,
}

impl Expect {
    fn check(&self, report: &Value) -> Result<(), String> {
        let got = report
            .pointer(&self.pointer)
            .ok_or_else(|| format!("{} missing", self.pointer))?;
        if let Some(want) = &self.equals {
            if got != want {
                return Err(format!("{}: expected {want}, got {got}", self.pointer));
            }
        }
        let num = || got.as_f64().ok_or_else(|| format!("{}: {got} is not a number", self.pointer));
        if let Some(want) = self.approx {
            let tol = self.tol.unwrap_or(1e-8);
            let x = num()?;
            if (x - want).abs() > tol {
                return Err(format!("{}: expected {want} ± {tol}, got {x}", self.pointer));
            }
        }
        if let Some(hi) = self.at_most {
            let x = num()?;
            if x > hi {
                return Err(format!("{}: {x} exceeds {hi}", self.pointer));
            }
        }
        if let Some(lo) = self.at_least {
            let x = num()?;
            if x < lo {
                return Err(format!("{}: {x} below {lo}", self.pointer));
            }
        }
        Ok(())
    }
}

fn run_fixture(dir: &Path, ctx: &Context) -> Result<(Vec<String>, Vec<Value>), String> {
    let text = std::fs::read_to_string(dir.join("expect.json")).map_err(|e| e.to_string())?;
    let fixture: FixtureFile = serde_json::from_str(&text).map_err(|e| format!("expect.json: {e}"))?;
    let local = ctx.with_base(dir);
    let mut problems = Vec::new();
    let mut reports = Vec::new();
    for run in &fixture.runs {
        let out = execute(&run.args, &local);
        let cmd = run.args.join(" ");
        if out.exit != run.exit {
            problems.push(format!("`{cmd}`: exit {} (expected {})", out.exit, run.exit));
        }
        let value = serde_json::to_value(&out.report).expect("reports serialize");
        for e in &run.expect {
            if let Err(msg) = e.check(&value) {
                problems.push(format!("`{cmd}`: {msg}"));
            }
        }
        reports.push(json!({"args": run.args, "exit": out.exit, "passed": out.report.passed}));
    }
    Ok((problems, reports))
}

pub fn run_suite(dir: &Path, args: &[String], ctx: &Context) -> Report {
    let mut report = Report::new("suite", args);
    let mut entries: Vec<_> = match std::fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.join("expect.json").is_file())
            .collect(),
        Err(e) => {
            report.flag("fixtures readable", false, 0.0, Some(format!("{}: {e}", dir.display())));
            return report;
        }
    };
    entries.sort();
    if entries.is_empty() {
        report.flag("fixtures present", false, 0.0, Some("0 fixtures".into()));
        report.line("0 fixtures");
        return report;
    }
    let mut runs = serde_json::Map::new();
    for path in &entries {
        let name = path.file_name().unwrap_or_default().to_string_lossy().to_string();
        match run_fixture(path, ctx) {
            Ok((problems, reports)) => {
                let ok = problems.is_empty();
                let detail = (!ok).then(|| problems.join("; "));
                report.flag(&format!("fixture {name}"), ok, problems.len() as f64, detail);
                runs.insert(name, Value::Array(reports));
            }
            Err(msg) => report.flag(&format!("fixture {name}"), false, 0.0, Some(msg)),
        }
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    report.line(format!("{passed}/{} fixtures passed", entries.len()));
    report.artifact("runs", runs);
    report
}
