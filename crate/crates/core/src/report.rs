use serde::{Deserialize, Serialize};

/// Default relative tolerance applied when deciding whether an inequality holds.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Outcome of one inequality evaluation.
///
/// `holds ⟺ lhs ≤ rhs·(1 + tol) + tail_error`. `tail_error` is the certified
/// budget for truncation or quadrature error in the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub ratio: f64,
    pub tol: f64,
    pub tail_error: f64,
}

impl InequalityReport {
    pub fn new(lhs: f64, rhs: f64, tol: f64, tail_error: f64) -> Self {
        let holds = lhs <= rhs * (1.0 + tol) + tail_error;
        Self { lhs, rhs, holds, ratio: ratio(lhs, rhs), tol, tail_error }
    }

    pub fn with_default_tol(lhs: f64, rhs: f64) -> Self {
        Self::new(lhs, rhs, DEFAULT_REL_TOL, 0.0)
    }

    /// Scales the right-hand side and re-evaluates; used by the sabotage self-test.
    pub fn with_rhs_scaled(self, factor: f64) -> Self {
        Self::new(self.lhs, self.rhs * factor, self.tol, self.tail_error)
    }

    /// `|ratio − 1| ≤ tol`.
    pub fn is_equality(&self, tol: f64) -> bool {
        (self.ratio - 1.0).abs() <= tol
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        lhs / rhs
    }
}
