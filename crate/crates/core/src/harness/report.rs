use serde::{Deserialize, Serialize};

use crate::decomposition::{BoundMode, CertificateSummary, Violation};

/// One measured quantity against its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub label: String,
    pub measured: f64,
    pub bound: f64,
    pub passed: bool,
    /// The bound is a lower bound rather than an upper one.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub at_least: bool,
}

impl Sample {
    /// Passes when `measured <= bound`.
    pub fn new(label: impl Into<String>, measured: f64, bound: f64) -> Sample {
        Sample { label: label.into(), measured, bound, passed: measured <= bound, at_least: false }
    }

    /// Passes when `measured >= minimum`.
    pub fn at_least(label: impl Into<String>, measured: f64, minimum: f64) -> Sample {
        Sample { label: label.into(), measured, bound: minimum, passed: measured >= minimum, at_least: true }
    }

    fn excess(&self) -> f64 {
        if self.at_least {
            self.bound - self.measured
        } else {
            self.measured - self.bound
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub passed: bool,
    /// Worst sample, when the check is numeric.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub samples: Vec<Sample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    /// Verdict from a list of samples; the reported worst sample is the one
    /// with the largest excess over its bound.
    pub fn from_samples(check: String, samples: Vec<Sample>) -> CheckResult {
        let worst = samples
            .iter()
            .max_by(|a, b| a.excess().total_cmp(&b.excess()));
        CheckResult {
            check,
            passed: !samples.is_empty() && samples.iter().all(|s| s.passed),
            measured: worst.map(|s| s.measured),
            bound: worst.map(|s| s.bound),
            detail: None,
            samples,
        }
    }

    pub fn failed(check: String, detail: impl Into<String>) -> CheckResult {
        CheckResult { check, passed: false, measured: None, bound: None, samples: vec![], detail: Some(detail.into()) }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> CheckResult {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    #[serde(flatten)]
    pub summary: CertificateSummary,
    pub epsilon_total: f64,
    pub epsilon_target: f64,
    pub m_bound: f64,
    pub m_mode: BoundMode,
    pub characteristic_system: String,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub tool_version: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_error: Option<String>,
    /// Wall-clock milliseconds; only recorded on request since it breaks
    /// byte-identical reports.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// One line per check.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}: {}\n", self.name, if self.passed { "PASS" } else { "FAIL" });
        for c in &self.checks {
            let verdict = if c.passed { "pass" } else { "FAIL" };
            out.push_str(&format!("  {verdict:4} {}", c.check));
            if let (Some(m), Some(b)) = (c.measured, c.bound) {
                out.push_str(&format!("  measured={m:.3e} bound={b:.3e}"));
            }
            if let Some(d) = &c.detail {
                out.push_str(&format!("  ({d})"));
            }
            out.push('\n');
        }
        out
    }
}

/// Reports of a suite, sorted by scenario name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub tool_version: String,
    pub passed: bool,
    pub scenarios: usize,
    pub failed: Vec<String>,
    pub reports: Vec<Report>,
}

impl SuiteReport {
    pub fn from_reports(mut reports: Vec<Report>) -> SuiteReport {
        reports.sort_by(|a, b| a.name.cmp(&b.name));
        let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.name.clone()).collect();
        SuiteReport {
            tool_version: crate::VERSION.to_string(),
            passed: failed.is_empty(),
            scenarios: reports.len(),
            failed,
            reports,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Process exit status: 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}
