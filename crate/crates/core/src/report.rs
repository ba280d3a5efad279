use std::fmt;

use serde::{Deserialize, Serialize};

/// One named check with its worst residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `residual <= tol`.
    pub fn push(&mut self, name: impl Into<String>, residual: f64, tol: f64) -> bool {
        let passed = residual.is_finite() && residual <= tol;
        self.checks.push(Check {
            name: name.into(),
            passed,
            residual: sanitize(residual),
            detail: None,
        });
        passed
    }

    pub fn push_with_detail(
        &mut self,
        name: impl Into<String>,
        passed: bool,
        residual: f64,
        detail: impl Into<String>,
    ) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            residual: sanitize(residual),
            detail: Some(detail.into()),
        });
    }

    pub fn push_flag(&mut self, name: impl Into<String>, passed: bool) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            residual: 0.0,
            detail: None,
        });
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

// JSON has no infinity; clamp so reports always serialize.
fn sanitize(x: f64) -> f64 {
    if x.is_nan() {
        f64::MAX
    } else {
        x.clamp(-f64::MAX, f64::MAX)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(
                f,
                "{:<4} {:<40} residual {:.3e}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.residual
            )?;
            if let Some(d) = &c.detail {
                write!(f, "  ({d})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
