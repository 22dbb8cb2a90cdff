//! Linear algebra and quantum objects.
//!
//! Operators carry their tensor-factor dimensions; partial traces, channel
//! application and permutations refer to subsystems by index into that list.

pub mod channel;
pub mod json;
pub mod linalg;
pub mod operator;
pub mod presets;
pub mod random;

pub use channel::{apply_channel, CpMap, KrausChannel, ReplacerSpec};
pub use linalg::{schatten_norm, ComplexMatrix, ComplexVector, Eigh};
pub use operator::{gamma_projector, gamma_vector, DensityOperator, HermitianOperator, PureState};
pub use random::{random_channel, random_pure, random_state};

/// `support_power(H, t)` as a free function.
pub fn support_power(h: &HermitianOperator, t: f64) -> crate::Result<HermitianOperator> {
    h.support_power(t)
}

/// Partial trace keeping the listed subsystems.
pub fn partial_trace(h: &HermitianOperator, keep: &[usize]) -> crate::Result<HermitianOperator> {
    h.partial_trace(keep)
}

/// `X^{1/2} Y X^{1/2}`.
pub fn conjugate_by(x: &HermitianOperator, y: &HermitianOperator) -> crate::Result<HermitianOperator> {
    x.conjugate(y)
}
