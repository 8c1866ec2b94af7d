//! Shared record type for exact verification passes.

use serde::Serialize;

/// Outcome of checking one identity over a set of instances.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub statement: String,
    pub instances: u64,
    pub exhaustive: bool,
    pub passed: bool,
    /// The first failing instance, if any.
    pub violation: Option<String>,
}

impl Check {
    pub fn skipped(name: &str, statement: &str, reason: &str) -> Check {
        Check {
            name: name.to_string(),
            statement: statement.to_string(),
            instances: 0,
            exhaustive: false,
            passed: true,
            violation: Some(format!("skipped: {reason}")),
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// Counts instances and keeps the first failure.
pub(crate) struct Tally {
    instances: u64,
    violation: Option<String>,
}

impl Tally {
    pub(crate) fn new() -> Self {
        Tally { instances: 0, violation: None }
    }

    #[inline]
    pub(crate) fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok && self.violation.is_none() {
            self.violation = Some(describe());
        }
    }

    pub(crate) fn record_many(&mut self, count: u64) {
        self.instances += count;
    }

    pub(crate) fn failed(&self) -> bool {
        self.violation.is_some()
    }

    pub(crate) fn finish(self, name: &str, statement: &str, exhaustive: bool) -> Check {
        Check {
            name: name.to_string(),
            statement: statement.to_string(),
            instances: self.instances,
            exhaustive,
            passed: self.violation.is_none(),
            violation: self.violation,
        }
    }
}
