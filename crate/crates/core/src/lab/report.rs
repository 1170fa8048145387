//! Report persistence: versioned JSON and an aligned text form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lab::checks::{CheckResult, EXACT_FLOW_TOL, FLOW_TOL, RATIO_TOL};
use crate::lab::scenario::Scenario;

pub const REPORT_SCHEMA: &str = "geolab.report/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub seed: u64,
    pub dt: f64,
    pub steps: usize,
    pub samples: usize,
    pub thresholds: BTreeMap<String, f64>,
    pub version: String,
}

impl Environment {
    pub fn for_scenario(s: &Scenario) -> Self {
        let thresholds = [
            ("involution", crate::integrals::INVOLUTION_TOL),
            ("invariance", crate::integrals::INVARIANCE_TOL),
            ("rank", crate::independence::RANK_TOL),
            ("sigma_ratio", RATIO_TOL),
            ("exact_flow", EXACT_FLOW_TOL),
            ("flow", FLOW_TOL),
            ("seam", crate::flows::glued::SEAM_TOL),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self {
            seed: s.seed,
            dt: s.dt,
            steps: s.steps,
            samples: s.samples,
            thresholds,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub scenario: String,
    pub anchor: String,
    pub description: String,
    pub family: String,
    pub chain: Vec<String>,
    pub environment: Environment,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "text" => Ok(Self::Text),
            _ => Err(Error::Unknown {
                kind: "report format",
                name: s.to_string(),
            }),
        }
    }
}

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into())
}

pub fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario  {} ({})", r.scenario, r.anchor);
    let _ = writeln!(out, "          {}", r.description);
    let _ = writeln!(out, "family    {}", r.family);
    if !r.chain.is_empty() {
        let _ = writeln!(out, "chain     {}", r.chain.join(" < "));
    }
    let _ = writeln!(
        out,
        "seed {}  dt {}  steps {}  samples {}",
        r.environment.seed, r.environment.dt, r.environment.steps, r.environment.samples
    );
    let width = r
        .checks
        .iter()
        .map(|c| c.check.name().len())
        .max()
        .unwrap_or(0);
    for c in &r.checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        let note = c
            .error
            .as_deref()
            .map(|e| format!("error: {e}"))
            .unwrap_or_else(|| c.summary.clone());
        let _ = writeln!(
            out,
            "{verdict}  {:<width$}  measured {:>10}  tol {:>10}  {note}",
            c.check.name(),
            num(c.measured),
            num(c.tolerance),
        );
    }
    let _ = writeln!(out, "overall {}", if r.passed { "PASS" } else { "FAIL" });
    out
}

pub fn render_json(r: &Report) -> Result<String> {
    Ok(serde_json::to_string_pretty(r)?)
}

pub fn parse_report(text: &str) -> Result<Report> {
    let r: Report = serde_json::from_str(text)?;
    if r.schema != REPORT_SCHEMA {
        return Err(Error::InvalidInput(format!(
            "unsupported report schema `{}` (expected `{REPORT_SCHEMA}`)",
            r.schema
        )));
    }
    Ok(r)
}

/// Writes the report to `path`, or returns it as a string when `path` is `None`.
pub fn emit_report(r: &Report, format: ReportFormat, path: Option<&Path>) -> Result<String> {
    let text = match format {
        ReportFormat::Json => render_json(r)?,
        ReportFormat::Text => render_text(r),
    };
    if let Some(p) = path {
        std::fs::write(p, &text)?;
    }
    Ok(text)
}
