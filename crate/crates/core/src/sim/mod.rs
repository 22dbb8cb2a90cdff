//! Executable discrimination and communication protocols.

pub mod adaptive;
pub mod classical;
pub mod feedback;

use serde::Serialize;

pub use adaptive::{
    nagaoka_bound_check_with, optimal_final_test, optimal_tensor_strategy, random_strategy, renyi_cb_bound_check,
    renyi_cb_bound_check_with, run_adaptive, tensor_strategy, AdaptiveStrategy, StrategyOutcome,
};
pub use classical::{classical_iid_stein, ClassicalStein};
pub use feedback::{
    feedback_bound_check, feedback_bound_check_with, random_protocol, replacer_success_probability, run_feedback,
    run_feedback_replacer,
    superdense_coding, FeedbackProtocol,
};

/// Outcome of checking `lhs ≤ rhs + tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

impl BoundCheck {
    pub fn new(lhs: f64, rhs: f64, tol: f64) -> Self {
        // −∞ ≤ anything; NaN never passes
        let ok = lhs == f64::NEG_INFINITY || lhs <= rhs + tol;
        Self { lhs, rhs, ok }
    }
}
