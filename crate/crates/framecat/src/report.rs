//! Report types shared by validators and the command-line driver.
//!
//! Every validator in the crate produces a [`ValidationReport`]: a list of
//! axiom violations (empty iff the subject is valid) plus a record of what
//! was actually checked. Checks that were skipped for budget reasons are
//! listed under `incomplete` rather than silently dropped, so "valid" always
//! means "no violation found and here is exactly what was covered".

use serde::{Deserialize, Serialize};

/// Version tag stamped on every serialized report and model file.
pub const SCHEMA: &str = "framecat/1";

/// A single axiom violation with the offending data spelled out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Short name of the violated law, e.g. `"associativity"`.
    pub axiom: String,
    /// Human-readable description citing the offending elements.
    pub detail: String,
}

/// Outcome of running a validator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub schema: String,
    /// What was validated, e.g. `"finset model, bound 3, depth 2"`.
    pub subject: String,
    pub violations: Vec<Violation>,
    /// Number of individual checks performed.
    pub checked: usize,
    /// Checks skipped because of size budgets, one entry per skipped group.
    pub incomplete: Vec<String>,
}

impl ValidationReport {
    pub fn new(subject: impl Into<String>) -> ValidationReport {
        ValidationReport {
            schema: SCHEMA.to_string(),
            subject: subject.into(),
            violations: Vec::new(),
            checked: 0,
            incomplete: Vec::new(),
        }
    }

    pub fn violation(&mut self, axiom: impl Into<String>, detail: impl Into<String>) {
        self.violations.push(Violation { axiom: axiom.into(), detail: detail.into() });
    }

    pub fn tick(&mut self) {
        self.checked += 1;
    }

    pub fn skip(&mut self, what: impl Into<String>) {
        self.incomplete.push(what.into());
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Merge another report into this one (used by suite runners).
    pub fn absorb(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
        self.checked += other.checked;
        self.incomplete.extend(other.incomplete);
    }
}
