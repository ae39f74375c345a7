use serde::{Deserialize, Serialize};

/// Absolute tolerance for every algebraic comparison in the checkers.
pub const TOLERANCE: f64 = 1e-9;

/// Most violations kept per report; `violation_count` holds the full count.
const MAX_RECORDED: usize = 64;

/// One counterexample to a checked property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub agent: usize,
    /// The misreport, counterpart agent, price or other witness value.
    pub datum: f64,
    /// Utility gain or constraint slack at the counterexample.
    pub slack: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<usize>,
}

impl Violation {
    pub fn new(agent: usize, datum: f64, slack: f64) -> Self {
        Violation {
            agent,
            datum,
            slack,
            instance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub property: String,
    pub pass: bool,
    pub violations: Vec<Violation>,
    pub violation_count: usize,
    /// Number of instances (or outcomes) examined.
    pub checked: usize,
    pub tolerance: f64,
}

impl VerificationReport {
    pub fn new(property: impl Into<String>, violations: Vec<Violation>) -> Self {
        let violation_count = violations.len();
        let mut violations = violations;
        violations.truncate(MAX_RECORDED);
        VerificationReport {
            property: property.into(),
            pass: violation_count == 0,
            violations,
            violation_count,
            checked: 1,
            tolerance: TOLERANCE,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    /// Folds another report on the same property into this one, tagging its
    /// violations with `instance`.
    pub fn absorb(&mut self, other: VerificationReport, instance: usize) {
        self.checked += other.checked;
        self.violation_count += other.violation_count;
        self.pass &= other.pass;
        for mut v in other.violations {
            if self.violations.len() >= MAX_RECORDED {
                break;
            }
            v.instance.get_or_insert(instance);
            self.violations.push(v);
        }
    }

    /// An empty, passing report to accumulate into.
    pub fn empty(property: impl Into<String>) -> Self {
        let mut r = VerificationReport::new(property, Vec::new());
        r.checked = 0;
        r
    }
}
