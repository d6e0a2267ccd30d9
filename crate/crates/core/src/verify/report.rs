use std::fmt::Write as _;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// Whether the tolerance bounds the defect from above (identities) or
/// from below (perturbation probes that must be detected).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Upper,
    Lower,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CheckResult {
    pub check_name: String,
    pub status: Status,
    /// `None` when the defect is not finite.
    pub worst_defect: Option<f64>,
    pub tolerance: f64,
    pub bound: Bound,
    pub seed: u64,
    pub samples: usize,
    pub expr_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    pub fn measured(name: &str, defect: f64, tolerance: f64, bound: Bound, seed: u64, samples: usize) -> CheckResult {
        let ok = match bound {
            Bound::Upper => defect <= tolerance,
            Bound::Lower => defect >= tolerance,
        };
        CheckResult {
            check_name: name.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            worst_defect: defect.is_finite().then_some(defect),
            tolerance,
            bound,
            seed,
            samples,
            expr_size: 0,
            note: None,
        }
    }

    pub fn error(name: &str, message: String, seed: u64) -> CheckResult {
        CheckResult {
            check_name: name.to_string(),
            status: Status::Error,
            worst_defect: None,
            tolerance: 0.0,
            bound: Bound::Upper,
            seed,
            samples: 0,
            expr_size: 0,
            note: Some(message),
        }
    }

    pub fn with_size(mut self, size: usize) -> CheckResult {
        self.expr_size = size;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> CheckResult {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(scenario: impl Into<String>, seed: u64) -> Report {
        Report { scenario: scenario.into(), seed, checks: Vec::new(), warnings: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check_name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are serializable")
    }

    /// One line per check.
    pub fn to_text(&self) -> String {
        let mut out = format!("scenario {} (seed {})\n", self.scenario, self.seed);
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Error => "ERROR",
            };
            let defect = c.worst_defect.map_or("inf".to_string(), |d| format!("{d:.3e}"));
            let op = if c.bound == Bound::Upper { "<=" } else { ">=" };
            let _ = write!(out, "{status:5} {:28} defect {defect} {op} {:.1e}", c.check_name, c.tolerance);
            if let Some(n) = &c.note {
                let _ = write!(out, "  ({n})");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "{}", if self.passed() { "all checks passed" } else { "some checks failed" });
        out
    }
}
