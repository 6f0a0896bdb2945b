//! Brute-force verification suite.

use std::fmt;

use serde::Serialize;

use crate::rational::{fraction_string, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Recorded but never fatal.
    Observation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckEntry {
    pub check: String,
    pub params: String,
    pub status: Status,
    pub lhs: String,
    pub rhs: String,
    /// Number of individual comparisons summarized by this entry.
    #[serde(skip_serializing_if = "is_one")]
    pub comparisons: u64,
}

fn is_one(v: &u64) -> bool {
    *v == 1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Report {
    entries: Vec<CheckEntry>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[CheckEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, check: &str, params: impl Into<String>, status: Status, lhs: String, rhs: String) {
        self.entries.push(CheckEntry { check: check.into(), params: params.into(), status, lhs, rhs, comparisons: 1 });
    }

    /// Exact equality of two rationals.
    pub fn compare(&mut self, check: &str, params: impl Into<String>, lhs: &Rational, rhs: &Rational) {
        let status = if lhs == rhs { Status::Pass } else { Status::Fail };
        self.push(check, params, status, fraction_string(lhs), fraction_string(rhs));
    }

    /// `lhs <= rhs`.
    pub fn compare_le(&mut self, check: &str, params: impl Into<String>, lhs: &Rational, rhs: &Rational) {
        let status = if lhs <= rhs { Status::Pass } else { Status::Fail };
        self.push(check, params, status, fraction_string(lhs), fraction_string(rhs));
    }

    pub fn assert_true(&mut self, check: &str, params: impl Into<String>, ok: bool, detail: impl Into<String>) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.push(check, params, status, detail.into(), "true".into());
    }

    pub fn observe(&mut self, check: &str, params: impl Into<String>, lhs: String, rhs: String) {
        self.push(check, params, Status::Observation, lhs, rhs);
    }

    /// One entry standing for `count` passing comparisons.
    pub fn pass_many(&mut self, check: &str, params: impl Into<String>, count: u64) {
        self.entries.push(CheckEntry {
            check: check.into(),
            params: params.into(),
            status: Status::Pass,
            lhs: format!("{count} comparisons"),
            rhs: "equal".into(),
            comparisons: count,
        });
    }

    pub fn merge(&mut self, other: Report) {
        self.entries.extend(other.entries);
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }

    pub fn comparisons(&self) -> u64 {
        self.entries.iter().map(|e| e.comparisons).sum()
    }

    /// Stable order by check name, then insertion order.
    pub fn sorted(mut self) -> Self {
        self.entries.sort_by(|a, b| a.check.cmp(&b.check));
        self
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let tag = match e.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Observation => "NOTE",
            };
            writeln!(f, "{tag} {} [{}] lhs={} rhs={}", e.check, e.params, e.lhs, e.rhs)?;
        }
        Ok(())
    }
}

mod fourier;
mod kraw;
mod programs;
mod suite;

pub use fourier::{brute_partial_fourier, verify_fourier_symmetries, verify_gl_consequences, Sampling, ORACLE_MAX_BITS};
pub use kraw::{verify_contingency_agreement, verify_level_set_identity, verify_univariate};
pub use programs::{
    optimum, verify_dual_lift, verify_even_reduction, verify_strength_theorems, verify_symmetrization_equivalence,
    verify_tensor_feasibility, LinearCode, StrengthOptions,
};
pub use suite::{run_suite, Suite, SuiteOptions};
