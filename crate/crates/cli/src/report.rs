//! Scenario reports and their renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub deviation: f64,
    pub tolerance: f64,
    pub exact: bool,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub note: String,
}

impl CheckResult {
    pub fn new(name: &str, deviation: f64, tolerance: f64, exact: bool, note: impl Into<String>) -> Self {
        // NaN deviations fail
        let status = if deviation <= tolerance { Status::Pass } else { Status::Fail };
        CheckResult { name: name.to_string(), status, deviation, tolerance, exact, note: note.into() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub module: String,
    pub topic: String,
    pub seed: u64,
    pub status: Status,
    pub checks: Vec<CheckResult>,
    /// Module-specific results.
    pub data: serde_json::Value,
    /// Artifact file names written next to the report.
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Wall-clock timing, kept apart from the deterministic reports.
#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub scenario: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
    }
}

fn fmt_num(x: f64, exact: bool) -> String {
    if exact {
        format!("{x}")
    } else {
        format!("{x:.3e}")
    }
}

pub fn render(reports: &[Report], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(reports).expect("reports serialize") + "\n",
        Format::Csv => {
            let mut out = String::from("scenario,check,status,deviation,tolerance,exact\n");
            for r in reports {
                for c in &r.checks {
                    let _ = writeln!(out, "{},{},{},{:e},{:e},{}", r.scenario, c.name, status_str(c.status), c.deviation, c.tolerance, c.exact);
                }
            }
            out
        }
        Format::Table => {
            let rows: Vec<[String; 5]> = reports
                .iter()
                .flat_map(|r| {
                    r.checks.iter().map(move |c| {
                        [
                            r.scenario.clone(),
                            c.name.clone(),
                            status_str(c.status).to_uppercase(),
                            fmt_num(c.deviation, c.exact),
                            if c.exact { "exact".into() } else { fmt_num(c.tolerance, false) },
                        ]
                    })
                })
                .collect();
            let header = ["scenario", "check", "status", "deviation", "tolerance"].map(String::from);
            let mut widths = header.clone().map(|h| h.len());
            for row in &rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            let mut out = String::new();
            for row in std::iter::once(&header).chain(&rows) {
                let line: Vec<String> = row.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
                let _ = writeln!(out, "{}", line.join("  ").trim_end());
            }
            let failed = reports.iter().flat_map(|r| &r.checks).filter(|c| c.status == Status::Fail).count();
            let _ = writeln!(out, "{} checks, {} passed, {failed} failed", rows.len(), rows.len() - failed);
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_follows_tolerance() {
        assert_eq!(CheckResult::new("a", 1e-13, 1e-12, false, "").status, Status::Pass);
        assert_eq!(CheckResult::new("a", 2e-12, 1e-12, false, "").status, Status::Fail);
        assert_eq!(CheckResult::new("a", f64::NAN, 1e-12, false, "").status, Status::Fail);
        assert_eq!(CheckResult::new("a", 0.0, 0.0, true, "").status, Status::Pass);
    }
}
