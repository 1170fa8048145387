//! Geodesic integrators and conservation monitoring.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod glued;
pub mod group;
pub mod quotient;
pub mod revolution;
pub mod sphere;

pub use glued::{glued_flow, GluedConfig, GluedTrajectory, SeamEvent};
pub use group::{
    canonical_bracket, geodesic_biinvariant, integrate_euler_arnold, GroupState, Inertia,
    Integrator,
};
pub use quotient::{horizontal_geodesic, integrate_quotient, make_horizontal, QuotientKind};
pub use revolution::{integrate_revolution, Profile, RevolutionState};
pub use sphere::{integrate_berger_sphere, integrate_round_sphere, BergerState};

/// Time-ordered states with aligned monitor values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub name: String,
    pub state_labels: Vec<String>,
    pub monitor_labels: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub energy: Vec<f64>,
    pub monitors: Vec<Vec<f64>>,
    /// Largest constraint residual seen (unit norm, tangency, horizontality).
    pub constraint_residual: f64,
    /// Set when the trajectory stopped early.
    pub truncated: Option<String>,
}

/// Drift of one monitored quantity: `max_t |m(t) - m(0)|`, plain and
/// relative to `max(1, |m(0)|)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorDrift {
    pub label: String,
    pub initial: f64,
    pub max_abs: f64,
    pub max_rel: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftSummary {
    pub name: String,
    pub samples: usize,
    pub final_time: f64,
    pub energy: MonitorDrift,
    pub monitors: Vec<MonitorDrift>,
    pub constraint_residual: f64,
    pub truncated: Option<String>,
}

impl DriftSummary {
    /// Largest relative drift over energy and all monitors.
    pub fn worst(&self) -> f64 {
        self.monitors
            .iter()
            .fold(self.energy.max_rel, |a, m| a.max(m.max_rel))
    }
}

fn drift_of(label: &str, values: impl Iterator<Item = f64>) -> MonitorDrift {
    let mut initial = None;
    let mut max_abs: f64 = 0.0;
    for v in values {
        let v0 = *initial.get_or_insert(v);
        max_abs = max_abs.max((v - v0).abs());
    }
    let initial = initial.unwrap_or(0.0);
    MonitorDrift {
        label: label.to_string(),
        initial,
        max_abs,
        max_rel: max_abs / initial.abs().max(1.0),
    }
}

impl Trajectory {
    pub fn new(
        name: impl Into<String>,
        state_labels: Vec<String>,
        monitor_labels: Vec<String>,
    ) -> Self {
        Self {
            name: name.into(),
            state_labels,
            monitor_labels,
            times: Vec::new(),
            states: Vec::new(),
            energy: Vec::new(),
            monitors: Vec::new(),
            constraint_residual: 0.0,
            truncated: None,
        }
    }

    pub fn push(&mut self, time: f64, state: Vec<f64>, energy: f64, monitors: Vec<f64>) {
        debug_assert_eq!(state.len(), self.state_labels.len());
        debug_assert_eq!(monitors.len(), self.monitor_labels.len());
        debug_assert!(self.times.last().is_none_or(|&t| time > t));
        self.times.push(time);
        self.states.push(state);
        self.energy.push(energy);
        self.monitors.push(monitors);
    }

    pub fn note_residual(&mut self, r: f64) {
        self.constraint_residual = self.constraint_residual.max(r);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn monitor(&self, label: &str) -> Option<Vec<f64>> {
        let k = self.monitor_labels.iter().position(|l| l == label)?;
        Some(self.monitors.iter().map(|m| m[k]).collect())
    }

    pub fn summary(&self) -> DriftSummary {
        DriftSummary {
            name: self.name.clone(),
            samples: self.len(),
            final_time: self.times.last().copied().unwrap_or(0.0),
            energy: drift_of("energy", self.energy.iter().copied()),
            monitors: self
                .monitor_labels
                .iter()
                .enumerate()
                .map(|(k, l)| drift_of(l, self.monitors.iter().map(|m| m[k])))
                .collect(),
            constraint_residual: self.constraint_residual,
            truncated: self.truncated.clone(),
        }
    }

    /// CSV with columns `time, <state>, energy, <monitors>`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["time".to_string()];
        header.extend(self.state_labels.iter().cloned());
        header.push("energy".into());
        header.extend(self.monitor_labels.iter().cloned());
        w.write_record(&header).map_err(csv_error)?;
        for k in 0..self.len() {
            let mut row = Vec::with_capacity(header.len());
            row.push(fmt(self.times[k]));
            row.extend(self.states[k].iter().map(|&x| fmt(x)));
            row.push(fmt(self.energy[k]));
            row.extend(self.monitors[k].iter().map(|&x| fmt(x)));
            w.write_record(&row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the CSV to `path` and the JSON drift summary next to it
    /// (`<stem>.summary.json`).
    pub fn export(&self, path: &Path) -> Result<std::path::PathBuf> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))?;
        let summary_path = path.with_extension("summary.json");
        std::fs::write(
            &summary_path,
            serde_json::to_string_pretty(&self.summary())?,
        )?;
        Ok(summary_path)
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

/// Validates a step size and step count.
pub(crate) fn check_steps(dt: f64, steps: usize) -> Result<()> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(Error::InvalidInput(format!(
            "time step must be finite and nonzero, got {dt}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidInput("step count must be positive".into()));
    }
    Ok(())
}

/// Records every `stride`-th step plus the last one, so long runs stay small.
pub(crate) fn record_stride(steps: usize, max_records: usize) -> usize {
    steps.div_ceil(max_records.max(1)).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Trajectory {
        let mut t = Trajectory::new("demo", vec!["x".into()], vec!["m".into()]);
        t.push(0.0, vec![1.0], 0.5, vec![2.0]);
        t.push(0.1, vec![1.1], 0.5 + 1e-12, vec![2.0 + 3e-9]);
        t.push(0.2, vec![1.2], 0.5, vec![2.0 - 1e-9]);
        t
    }

    #[test]
    fn drift_summary() {
        let s = sample().summary();
        assert_eq!(s.samples, 3);
        assert!((s.energy.max_abs - 1e-12).abs() < 1e-16);
        assert!((s.monitors[0].max_abs - 3e-9).abs() < 1e-15);
        assert!((s.monitors[0].max_rel - 1.5e-9).abs() < 1e-15);
        assert!(s.worst() > 1.4e-9);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "time,x,energy,m");
        assert_eq!(lines.len(), 4);
        let back: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(back, 1.1);
    }

    #[test]
    fn export_writes_summary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        let summary = sample().export(&path).unwrap();
        let s: DriftSummary =
            serde_json::from_str(&std::fs::read_to_string(summary).unwrap()).unwrap();
        assert_eq!(s.name, "demo");
    }

    #[test]
    fn step_validation() {
        assert!(check_steps(1e-3, 10).is_ok());
        assert!(check_steps(0.0, 10).is_err());
        assert!(check_steps(f64::NAN, 10).is_err());
        assert!(check_steps(1e-3, 0).is_err());
        assert_eq!(record_stride(100_000, 10_000), 10);
        assert_eq!(record_stride(5, 10_000), 1);
    }
}
