//! Check records and JSON reports shared by the verification suites.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
}

/// Check records plus named summary values.
pub type SuiteOutput = (Vec<CheckRecord>, Vec<(String, f64)>);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub observed: f64,
    pub bound: f64,
    pub tolerance: f64,
}

impl CheckRecord {
    /// Passes iff `observed ≤ bound + tol`.
    pub fn le(name: impl Into<String>, observed: f64, bound: f64, tol: f64) -> CheckRecord {
        let ok = observed <= bound + tol;
        CheckRecord::with(name, ok, observed, bound, tol)
    }

    /// Passes iff `observed ≥ bound − tol`.
    pub fn ge(name: impl Into<String>, observed: f64, bound: f64, tol: f64) -> CheckRecord {
        let ok = observed >= bound - tol;
        CheckRecord::with(name, ok, observed, bound, tol)
    }

    /// Passes iff `|observed − expected| ≤ tol`.
    pub fn close(name: impl Into<String>, observed: f64, expected: f64, tol: f64) -> CheckRecord {
        let ok = (observed - expected).abs() <= tol;
        CheckRecord::with(name, ok, observed, expected, tol)
    }

    /// A count of disagreements that must be zero.
    pub fn zero_count(name: impl Into<String>, count: usize, tol: f64) -> CheckRecord {
        CheckRecord::with(name, count == 0, count as f64, 0.0, tol)
    }

    pub fn indeterminate(name: impl Into<String>, observed: f64, bound: f64, tol: f64) -> CheckRecord {
        CheckRecord {
            name: name.into(),
            status: Status::Indeterminate,
            observed,
            bound,
            tolerance: tol,
        }
    }

    fn with(name: impl Into<String>, ok: bool, observed: f64, bound: f64, tol: f64) -> CheckRecord {
        CheckRecord {
            name: name.into(),
            status: if ok && observed.is_finite() { Status::Pass } else { Status::Fail },
            observed,
            bound,
            tolerance: tol,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub solves: u64,
    pub iterations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub command: Vec<String>,
    pub status: Status,
    pub records: Vec<CheckRecord>,
    /// Named observations (extremal ratios, maxima) that are not checks.
    pub summary: BTreeMap<String, f64>,
    pub solver: SolverStats,
    pub timing_ms: u64,
}

impl Report {
    pub fn new(command: Vec<String>) -> Report {
        Report {
            schema: SCHEMA_VERSION,
            command,
            status: Status::Pass,
            records: Vec::new(),
            summary: BTreeMap::new(),
            solver: SolverStats::default(),
            timing_ms: 0,
        }
    }

    pub fn push(&mut self, r: CheckRecord) {
        self.records.push(r);
        self.status = overall(&self.records);
    }

    pub fn extend(&mut self, rs: impl IntoIterator<Item = CheckRecord>) {
        self.records.extend(rs);
        self.status = overall(&self.records);
    }

    pub fn note(&mut self, key: impl Into<String>, value: f64) {
        self.summary.insert(key.into(), value);
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Fail if any record fails; otherwise indeterminate if any record is.
pub fn overall(records: &[CheckRecord]) -> Status {
    if records.iter().any(|r| r.status == Status::Fail) {
        Status::Fail
    } else if records.iter().any(|r| r.status == Status::Indeterminate) {
        Status::Indeterminate
    } else {
        Status::Pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_status() {
        let mut r = Report::new(vec!["verify".into()]);
        assert!(r.passed());
        r.push(CheckRecord::le("a", 1.0, 1.0, 0.0));
        assert!(r.passed());
        r.push(CheckRecord::indeterminate("b", f64::NAN, 0.0, 0.0));
        assert_eq!(r.status, Status::Indeterminate);
        r.push(CheckRecord::close("c", 1.0, 2.0, 0.5));
        assert_eq!(r.status, Status::Fail);
        assert!(!CheckRecord::le("nan", f64::NAN, 1.0, 0.0).passed());
    }
}
