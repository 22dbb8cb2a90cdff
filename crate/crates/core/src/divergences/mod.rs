//! State divergences in bits.
//!
//! | Function | Quantity |
//! |----------|----------|
//! | [`relative_entropy`] | `D(ρ‖σ)` |
//! | [`petz_renyi`] | `D_α(ρ‖σ)` |
//! | [`sandwiched_renyi`] | `D̃_α(ρ‖σ)`, including `α = ∞` |
//! | [`renyi_auto`] | either family, spliced to `D` at `α = 1` |
//! | [`hypothesis_testing`] | `D_H^ε(ρ‖σ)` with an optimal test |
//! | [`hoeffding_divergence`], [`hoeffding_anti_divergence`] | `H_r`, `H*_r` |
//! | [`renyi_mutual_information`] | `inf_σ D_α(ρ_RB‖ρ_R⊗σ_B)` |
//!
//! First arguments may be subnormalized; the Rényi families carry the
//! `1/Tr ρ` prefactor.

pub mod hoeffding;
pub mod mutual_info;
pub mod renyi;
pub mod testing;
pub mod value;

pub use hoeffding::{hoeffding_anti_divergence, hoeffding_divergence, OrderOptimum};
pub use mutual_info::{renyi_mutual_information, renyi_mutual_information_with};
pub use renyi::{
    max_relative_entropy, petz_renyi, relative_entropy, renyi_auto, sandwiched_renyi,
    sandwiched_renyi_trace_form,
};
pub use testing::{hypothesis_testing, BinaryTest, HypothesisTestResult};
pub use value::{AlphaStar, DivergenceValue, RenyiFamily};
