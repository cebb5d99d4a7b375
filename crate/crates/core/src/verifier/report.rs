use serde::{Deserialize, Serialize};

use super::midpoint::{ConcavityReport, Witness};
use super::suites::{GridPoint, RunSettings};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub trials: usize,
    pub dims: Vec<usize>,
    pub rel_tol: f64,
    pub cond_cap: f64,
}

impl RunHeader {
    pub fn new(settings: &RunSettings, dims: Vec<usize>) -> Self {
        Self {
            trials: settings.trials,
            dims,
            rel_tol: settings.rel_tol,
            cond_cap: settings.cond_cap,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointReport {
    pub params: GridPoint,
    pub trials: usize,
    pub violations: usize,
    pub worst_gap: f64,
    pub witness: Option<Witness>,
    pub runtime_ms: u64,
}

impl PointReport {
    pub fn new(params: GridPoint, report: ConcavityReport) -> Self {
        Self {
            params,
            trials: report.trials_run,
            violations: report.violations,
            worst_gap: report.worst_gap,
            witness: report.worst_witness,
            runtime_ms: report.runtime_ms,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub config: RunHeader,
    pub points: Vec<PointReport>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SuiteReport {
    pub fn new(suite: String, seed: u64, config: RunHeader, points: Vec<PointReport>) -> Self {
        let passed = points.iter().all(|p| p.violations == 0);
        Self {
            suite,
            seed,
            config,
            points,
            passed,
            note: None,
        }
    }

    pub fn total_violations(&self) -> usize {
        self.points.iter().map(|p| p.violations).sum()
    }

    pub fn worst_gap(&self) -> f64 {
        self.points.iter().map(|p| p.worst_gap).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn runtime_ms(&self) -> u64 {
        self.points.iter().map(|p| p.runtime_ms).sum()
    }

    pub const CSV_HEADER: [&'static str; 7] = ["suite", "point", "params", "trials", "violations", "worst_gap", "runtime_ms"];

    /// One row per grid point, in [`SuiteReport::CSV_HEADER`] order.
    pub fn csv_rows(&self) -> impl Iterator<Item = [String; 7]> + '_ {
        self.points.iter().enumerate().map(|(i, p)| {
            [
                self.suite.clone(),
                i.to_string(),
                p.params.describe(),
                p.trials.to_string(),
                p.violations.to_string(),
                format!("{:e}", p.worst_gap),
                p.runtime_ms.to_string(),
            ]
        })
    }
}
