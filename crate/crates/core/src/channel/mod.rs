//! Channel divergences and discrimination exponents.
//!
//! Channel quantities are suprema over inputs `ρ_{A'}` on a copy of the
//! input space, evaluated on `ρ^{1/2} 𝒩(Γ) ρ^{1/2}`.

pub mod divergence;
pub mod exponents;
pub mod mutual;
pub mod report;

pub use divergence::{
    cb_one_to_alpha_norm, channel_max_relative_entropy, channel_relative_entropy, channel_relative_entropy_with,
    channel_renyi_divergence, channel_renyi_divergence_with, finiteness_check, log2_cb_one_to_alpha_norm,
    replacer_divergence_via_cb, replacer_divergence_via_cb_with, theta_map, ChannelDivergenceQuery, FinitenessCheck, SecondChannel,
};
pub use exponents::{
    composite_sc_bounds, composite_sc_bounds_with, composite_stein_exponent, composite_stein_exponent_with,
    feedback_sc_exponent, feedback_sc_exponent_with, stein_exponent, strong_converse_exponent,
    strong_converse_exponent_with, CompositeBounds, ExponentOptions,
};
pub use mutual::{channel_mutual_information, default_search, channel_mutual_information_with, replacer_set_divergence, replacer_set_divergence_with};
pub use report::{ExponentReport, ReportFlags};
