//! Null controllability fails: the zero-control transfer formula, the
//! solvability threshold for the initial coefficients, rough targets and the
//! cost blow-up they cause.
//!
//! Mode numbers in this module are 1-based (`n = 1` is the lowest mode) to
//! match the usual statement of the problem.

mod audit;
mod rough;
mod terms;
mod zero;

#[cfg(test)]
mod tests;

pub use audit::{hn_bound_audit, range_ratio, HnAuditRow};
pub use rough::{blowup_experiment, build_rough_target, smooth_reference, BlowupPoint, RoughTarget};
pub use zero::{
    find_threshold_n, solve_xi_for_coefficients, zero_control_rhs, ThresholdOutcome, ZeroControlProblem,
};
