//! Seeded random instances: Ginibre states, Haar-ish pure states, isometry-dilated channels.
//!
//! Every generator exists in two forms, one taking a `u64` seed and one
//! taking a caller-owned RNG, so that derived streams stay reproducible.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::channel::KrausChannel;
use super::linalg::{self, ComplexMatrix, ComplexVector};
use super::operator::{DensityOperator, PureState};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre_with<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

/// `G G† / Tr(G G†)` for a square Ginibre `G` (Hilbert–Schmidt measure).
pub fn random_state_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityOperator {
    let g = ginibre_with(d, d, rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    DensityOperator::from_raw(linalg::hermitian_part(&m.unscale(tr)), vec![d])
}

pub fn random_state(d: usize, seed: u64) -> DensityOperator {
    random_state_with(d, &mut rng_from_seed(seed))
}

pub fn random_pure_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState {
    let v = ComplexVector::from_iterator(d, (0..d).map(|_| gaussian(rng)));
    PureState::normalized(v, vec![d]).expect("gaussian vector is nonzero")
}

pub fn random_pure(d: usize, seed: u64) -> PureState {
    random_pure_with(d, &mut rng_from_seed(seed))
}

/// Orthonormalize the columns of `m` in place (modified Gram–Schmidt).
fn orthonormalize_columns(m: &mut ComplexMatrix) {
    for j in 0..m.ncols() {
        for k in 0..j {
            let proj: Complex64 = m.column(k).dotc(&m.column(j));
            let ck = m.column(k).into_owned();
            let mut cj = m.column_mut(j);
            cj -= ck * proj;
        }
        let n = m.column(j).norm();
        m.column_mut(j).unscale_mut(n);
    }
}

/// Haar-distributed unitary via Gram–Schmidt on a Ginibre matrix.
pub fn random_unitary_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let mut g = ginibre_with(d, d, rng);
    orthonormalize_columns(&mut g);
    g
}

/// Random isometry `V: C^{d_in} → C^{k d_out}` cut into `k` Kraus operators.
pub fn random_channel_with<R: Rng + ?Sized>(
    d_in: usize,
    d_out: usize,
    kraus_count: usize,
    rng: &mut R,
) -> KrausChannel {
    assert!(kraus_count * d_out >= d_in, "dilation too small for an isometry");
    let mut v = ginibre_with(kraus_count * d_out, d_in, rng);
    orthonormalize_columns(&mut v);
    let kraus = (0..kraus_count)
        .map(|j| v.rows(j * d_out, d_out).into_owned())
        .collect();
    KrausChannel::new(d_in, d_out, kraus).expect("isometry blocks form a channel")
}

pub fn random_channel(d_in: usize, d_out: usize, kraus_count: usize, seed: u64) -> KrausChannel {
    random_channel_with(d_in, d_out, kraus_count, &mut rng_from_seed(seed))
}

/// Random binary test `0 ≤ Q ≤ I`: random eigenbasis with uniform eigenvalues.
pub fn random_test_operator_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let u = random_unitary_with(d, rng);
    let vals: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let m = &u * super::operator::diag_matrix(&vals) * u.adjoint();
    linalg::hermitian_part(&m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_output() {
        assert_eq!(random_state(3, 42), random_state(3, 42));
        assert_eq!(random_pure(4, 1), random_pure(4, 1));
        assert_eq!(random_channel(2, 2, 3, 5), random_channel(2, 2, 3, 5));
        assert_ne!(random_state(3, 42), random_state(3, 43));
    }

    #[test]
    fn random_state_is_valid() {
        let rho = random_state(2, 1);
        assert!(DensityOperator::from_hermitian(rho.operator().clone()).is_ok());
    }

    #[test]
    fn random_channel_is_trace_preserving() {
        for seed in 0..20 {
            let ch = random_channel(2, 3, 2, seed);
            assert!(ch.tp_residual() <= 1e-9);
        }
    }

    #[test]
    fn random_unitary_is_unitary() {
        let u = random_unitary_with(4, &mut rng_from_seed(3));
        let id = ComplexMatrix::identity(4, 4);
        assert!(linalg::max_abs_diff(&(u.adjoint() * &u), &id) < 1e-13);
    }
}
