use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Holds,
    HoldsWithinError,
    Violated,
}

/// Outcome of checking one inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub gap: f64,
    pub discretization_error_estimate: f64,
    pub verdict: Verdict,
}

impl GapReport {
    /// Verdict is `Violated` iff `gap < -err`; `HoldsWithinError` when the gap is
    /// negative but within the error estimate.
    pub fn new(lhs: f64, rhs: f64, discretization_error_estimate: f64) -> Self {
        let gap = rhs - lhs;
        let err = discretization_error_estimate.abs();
        let verdict = if gap.is_nan() || gap < -err {
            Verdict::Violated
        } else if gap < 0.0 {
            Verdict::HoldsWithinError
        } else {
            Verdict::Holds
        };
        Self {
            lhs,
            rhs,
            gap,
            discretization_error_estimate: err,
            verdict,
        }
    }

    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }

    /// True when `|gap|` is within `tol` (for equality cases).
    pub fn is_tight(&self, tol: f64) -> bool {
        self.gap.abs() <= tol
    }
}
