//! Verification reports.

use crate::linalg::C64;

/// Relative slack allowed on every bound check.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: String,
    pub bound: f64,
    pub attained: f64,
    pub pass: bool,
    /// Diagnostic checks are reported but do not decide the verdict.
    pub asserted: bool,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>, bound: f64, attained: f64) -> Self {
        let pass = attained <= bound * (1.0 + BOUND_SLACK) || attained <= bound + f64::MIN_POSITIVE;
        Self { name: name.into(), bound, attained, pass, asserted: true }
    }

    pub fn diagnostic(mut self) -> Self {
        self.asserted = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub identity: String,
    pub lhs: C64,
    pub rhs: C64,
    pub abs_residual: f64,
    /// `|lhs - rhs| / (1 + |lhs|)`.
    pub rel_residual: f64,
    pub tolerance: f64,
    pub bound_checks: Vec<BoundCheck>,
}

impl VerificationReport {
    pub fn new(identity: impl Into<String>, lhs: C64, rhs: C64, tolerance: f64) -> Self {
        let abs_residual = (lhs - rhs).norm();
        Self {
            identity: identity.into(),
            lhs,
            rhs,
            abs_residual,
            rel_residual: abs_residual / (1.0 + lhs.norm()),
            tolerance,
            bound_checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: BoundCheck) {
        self.bound_checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.rel_residual <= self.tolerance && self.bound_checks.iter().all(|c| c.pass || !c.asserted)
    }

    pub fn failures(&self) -> Vec<&BoundCheck> {
        self.bound_checks.iter().filter(|c| c.asserted && !c.pass).collect()
    }
}
