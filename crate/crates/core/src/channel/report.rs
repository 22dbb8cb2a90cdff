use serde::{Serialize, Serializer};

use crate::divergences::{AlphaStar, DivergenceValue};
use crate::qmat::json::StateJson;
use crate::qmat::DensityOperator;

/// Value of an optimized quantity together with its witnesses and certificates.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentReport {
    /// Name of the computed quantity, e.g. `"strong_converse_exponent"`.
    pub quantity: String,
    /// Value in bits (per channel use for exponents).
    pub value: DivergenceValue,
    pub alpha_star: AlphaStar,
    /// Input-state witness `ρ_{A'}` (or the optimal `ρ` of a state-level problem).
    #[serde(serialize_with = "serialize_state")]
    pub rho_star: Option<DensityOperator>,
    /// Output-side witness `σ_B`, when the quantity optimizes over one.
    #[serde(serialize_with = "serialize_state")]
    pub sigma_star: Option<DensityOperator>,
    /// The same quantity computed with the optimizations in swapped order, when available.
    pub dual_value: Option<DivergenceValue>,
    /// Largest discrepancy between independent evaluations of the value
    /// (grid versus descent, and primal versus swapped order).
    pub gap_certificate: f64,
    pub iterations: usize,
    /// Declared accuracy of the value.
    pub tolerance: f64,
    /// The optimum over `α` is a limit rather than an attained interior point.
    pub attained_at_boundary: bool,
    pub flags: ReportFlags,
    /// Index of the multi-start run that produced the witness.
    pub winning_start: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ReportFlags {
    /// The order lies outside the range where the optimization is known to be well behaved.
    pub heuristic: bool,
    /// A support condition fails and the value is `+∞`.
    pub infinite: bool,
}

fn serialize_state<S: Serializer>(state: &Option<DensityOperator>, s: S) -> Result<S::Ok, S::Error> {
    match state {
        Some(rho) => StateJson::from(rho.operator()).serialize(s),
        None => s.serialize_none(),
    }
}

impl ExponentReport {
    pub fn new(quantity: &str, value: DivergenceValue) -> Self {
        Self {
            quantity: quantity.to_string(),
            value,
            alpha_star: AlphaStar::NotApplicable,
            rho_star: None,
            sigma_star: None,
            dual_value: None,
            gap_certificate: 0.0,
            iterations: 0,
            tolerance: 1e-6,
            attained_at_boundary: false,
            flags: ReportFlags::default(),
            winning_start: 0,
        }
    }

    pub fn infinite(quantity: &str) -> Self {
        let mut r = Self::new(quantity, DivergenceValue::Infinite);
        r.flags.infinite = true;
        r
    }

    /// The value as `f64` (`+∞` allowed).
    pub fn value(&self) -> f64 {
        self.value.value()
    }

    pub fn with_alpha(mut self, a: AlphaStar) -> Self {
        self.attained_at_boundary = a.is_boundary() && a != AlphaStar::NotApplicable;
        self.alpha_star = a;
        self
    }
}
