//! # renyikit
//!
//! Quantum Rényi divergences, channel divergences and error exponents for
//! discriminating a quantum channel from a replacer channel, together with
//! executable models of adaptive discrimination strategies and
//! feedback-assisted codes.
//!
//! All logarithms are base two; every divergence and exponent is reported in
//! bits (or bits per channel use).
//!
//! ## Layout
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`qmat`] | Hermitian eigensolver, support powers, Schatten norms, tensor/partial-trace calculus, Kraus channels |
//! | [`divergences`] | `D`, Petz `D_α`, sandwiched `D̃_α`, `D_H^ε`, Hoeffding (anti-)divergence, Rényi mutual information |
//! | [`optimize`] | BFGS over density matrices, multi-start, Bloch-grid certification, golden section, minimax |
//! | [`channel`] | channel Rényi divergences, CB-norm form, channel mutual information and every exponent |
//! | [`sim`] | adaptive strategies, feedback-assisted protocols, exact classical i.i.d. Stein checker |
//! | [`verify`] | property suites shared by the CLI and the acceptance tests |
//!
//! ## Quick start
//!
//! ```
//! use renyikit::qmat::DensityOperator;
//! use renyikit::divergences::sandwiched_renyi;
//!
//! let rho = DensityOperator::diagonal(&[0.5, 0.5]).unwrap();
//! let sigma = DensityOperator::diagonal(&[0.25, 0.75]).unwrap();
//! let d = sandwiched_renyi(&rho, &sigma, 2.0).unwrap();
//! assert!((d.value() - (4.0f64 / 3.0).log2()).abs() < 1e-12);
//! ```

#![forbid(unsafe_code)]

pub mod channel;
pub mod divergences;
pub mod optimize;
pub mod qmat;
pub mod sim;
pub mod verify;

mod error;

pub use error::{Error, Result};
