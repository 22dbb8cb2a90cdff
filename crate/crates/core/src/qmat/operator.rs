use std::ops::Deref;

use num_complex::Complex64;

use super::linalg::{
    self, eigh, hermiticity_defect, ComplexMatrix, ComplexVector, Eigh, HERMITICITY_TOL, ONE,
    PSD_TOL, ZERO,
};
use crate::{Error, Result};

/// Tolerance on `|Tr ρ − 1|` for density operators.
pub const TRACE_TOL: f64 = 1e-10;

/// A Hermitian matrix together with the dimensions of its tensor factors.
///
/// Construction symmetrizes the input after checking that it is Hermitian
/// within [`HERMITICITY_TOL`], so every stored matrix is exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::domain(format!(
                "expected a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        check_dims(&dims, matrix.nrows())?;
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("matrix has non-finite entries"));
        }
        let scale = matrix.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITICITY_TOL * scale {
            return Err(Error::domain(format!("matrix is not Hermitian (defect {defect:.3e})")));
        }
        Ok(Self::from_raw(linalg::hermitian_part(&matrix), dims))
    }

    /// Single-system operator.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let d = matrix.nrows();
        Self::new(matrix, vec![d])
    }

    pub(crate) fn from_raw(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.nrows());
        Self { matrix, dims }
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let d = dims.iter().product();
        Self::from_raw(ComplexMatrix::identity(d, d), dims)
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let d = dims.iter().product();
        Self::from_raw(ComplexMatrix::zeros(d, d), dims)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let v = ComplexVector::from_iterator(values.len(), values.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::from_raw(ComplexMatrix::from_diagonal(&v), vec![values.len()])
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn eigh(&self) -> Eigh {
        eigh(&self.matrix)
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    /// `Tr(self · other)`, real for Hermitian arguments.
    pub fn expectation(&self, other: &HermitianOperator) -> f64 {
        linalg::trace_of_product(&self.matrix, &other.matrix).re
    }

    /// Relabel the tensor factors; the product must be unchanged.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, self.dim())?;
        Ok(Self::from_raw(self.matrix.clone(), dims))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_raw(self.matrix.scale(c), self.dims.clone())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self::from_raw(&self.matrix + &other.matrix, self.dims.clone()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self::from_raw(&self.matrix - &other.matrix, self.dims.clone()))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::domain(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    /// `Σ_{x_i > cutoff} x_i^t P_i`; negative powers act as pseudo-inverses.
    pub fn support_power(&self, t: f64) -> Result<Self> {
        let m = linalg::psd_power(&self.matrix, t)?;
        Ok(Self::from_raw(linalg::hermitian_part(&m), self.dims.clone()))
    }

    pub fn support_projector(&self) -> Result<Self> {
        self.support_power(0.0)
    }

    pub fn is_psd(&self) -> bool {
        let e = self.eigh();
        e.min() >= -PSD_TOL * e.max().abs().max(1.0)
    }

    /// Trace norm `‖H‖₁`.
    pub fn trace_norm(&self) -> f64 {
        linalg::trace_norm_hermitian(&self.matrix)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_raw(linalg::kron(&self.matrix, &other.matrix), dims)
    }

    /// Reorder tensor factors: factor `k` of the result is factor `order[k]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::domain("permutation length does not match the number of subsystems"));
        }
        for &k in order {
            if k >= n || seen[k] {
                return Err(Error::domain(format!("invalid subsystem permutation {order:?}")));
            }
            seen[k] = true;
        }
        let new_dims: Vec<usize> = order.iter().map(|&k| self.dims[k]).collect();
        let map = permuted_index_map(&self.dims, order);
        let d = self.dim();
        let m = ComplexMatrix::from_fn(d, d, |i, j| self.matrix[(map[i], map[j])]);
        Ok(Self::from_raw(m, new_dims))
    }

    /// Reduced operator on the subsystems listed in `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        for (pos, &k) in keep.iter().enumerate() {
            if k >= n {
                return Err(Error::domain(format!(
                    "subsystem index {k} out of range for {n} subsystems"
                )));
            }
            if keep[..pos].contains(&k) {
                return Err(Error::domain(format!("subsystem {k} listed twice")));
            }
        }
        let mut order: Vec<usize> = keep.to_vec();
        order.extend((0..n).filter(|k| !keep.contains(k)));
        let permuted = self.permute(&order)?;
        let dk: usize = keep.iter().map(|&k| self.dims[k]).product();
        let dt = self.dim() / dk;
        let m = &permuted.matrix;
        let reduced = ComplexMatrix::from_fn(dk, dk, |i, j| {
            (0..dt).map(|t| m[(i * dt + t, j * dt + t)]).sum()
        });
        let dims = if keep.is_empty() { vec![1] } else { keep.iter().map(|&k| self.dims[k]).collect() };
        Ok(Self::from_raw(reduced, dims))
    }

    /// `X^{1/2} Y X^{1/2}` where `X = self` must be PSD.
    pub fn conjugate(&self, y: &Self) -> Result<Self> {
        self.check_same_shape(y)?;
        let m = linalg::conjugate_by_sqrt(&self.matrix, &y.matrix)?;
        Ok(Self::from_raw(linalg::hermitian_part(&m), y.dims.clone()))
    }

    /// `A H A†` for an arbitrary (possibly rectangular) `A`; the result is a
    /// single-system operator unless `dims` is given.
    pub fn sandwich(&self, a: &ComplexMatrix, dims: Option<Vec<usize>>) -> Result<Self> {
        if a.ncols() != self.dim() {
            return Err(Error::domain("sandwich: dimension mismatch"));
        }
        let m = linalg::hermitian_part(&(a * &self.matrix * a.adjoint()));
        let dims = dims.unwrap_or_else(|| vec![m.nrows()]);
        check_dims(&dims, m.nrows())?;
        Ok(Self::from_raw(m, dims))
    }
}

/// `index_map[new] = old` for the tensor-factor permutation `order`.
fn permuted_index_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let d: usize = dims.iter().product();
    let mut old_strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        old_strides[k] = old_strides[k + 1] * dims[k + 1];
    }
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let mut map = Vec::with_capacity(d);
    let mut digits = vec![0usize; n];
    for _ in 0..d {
        let old: usize = digits.iter().zip(order).map(|(&x, &k)| x * old_strides[k]).sum();
        map.push(old);
        for pos in (0..n).rev() {
            digits[pos] += 1;
            if digits[pos] < new_dims[pos] {
                break;
            }
            digits[pos] = 0;
        }
    }
    map
}

fn check_dims(dims: &[usize], d: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != d {
        return Err(Error::domain(format!(
            "subsystem dimensions {dims:?} do not multiply to {d}"
        )));
    }
    Ok(())
}

/// A positive semidefinite, unit-trace [`HermitianOperator`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(HermitianOperator);

impl Deref for DensityOperator {
    type Target = HermitianOperator;
    fn deref(&self) -> &HermitianOperator {
        &self.0
    }
}

impl AsRef<HermitianOperator> for DensityOperator {
    fn as_ref(&self) -> &HermitianOperator {
        &self.0
    }
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        Self::from_hermitian(HermitianOperator::new(matrix, dims)?)
    }

    pub fn from_hermitian(op: HermitianOperator) -> Result<Self> {
        let e = op.eigh();
        if e.min() < -PSD_TOL {
            return Err(Error::domain(format!(
                "state is not positive semidefinite (min eigenvalue {:.3e})",
                e.min()
            )));
        }
        let tr = op.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::domain(format!("state has trace {tr}, expected 1")));
        }
        Ok(Self(op))
    }

    /// Normalize a nonzero PSD operator to unit trace.
    pub fn normalized(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if !(tr > 0.0) {
            return Err(Error::domain("cannot normalize an operator with non-positive trace"));
        }
        Self::from_hermitian(op.scale(1.0 / tr))
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_raw(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        Self(HermitianOperator::from_raw(matrix, dims))
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::from_hermitian(HermitianOperator::diagonal(probs))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(HermitianOperator::identity(vec![d]).scale(1.0 / d as f64))
    }

    /// `|i⟩⟨i|` in dimension `d`.
    pub fn basis(d: usize, i: usize) -> Self {
        PureState::basis(d, i).to_density()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn into_operator(self) -> HermitianOperator {
        self.0
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self(self.0.tensor(&other.0))
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        Ok(Self(self.0.partial_trace(keep)?))
    }

    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        Ok(Self(self.0.permute(order)?))
    }

    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        Ok(Self(self.0.with_dims(dims)?))
    }
}

/// A normalized state vector with subsystem labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: ComplexVector,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: ComplexVector, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("state vector has norm {norm}, expected 1")));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Normalize an arbitrary nonzero vector.
    pub fn normalized(amplitudes: ComplexVector, dims: Vec<usize>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) {
            return Err(Error::domain("cannot normalize the zero vector"));
        }
        Self::new(amplitudes.unscale(norm), dims)
    }

    pub fn basis(d: usize, i: usize) -> Self {
        Self { amplitudes: linalg::basis_vector(d, i), dims: vec![d] }
    }

    /// `(|00⟩ + … + |d−1,d−1⟩)/√d` on `d × d`.
    pub fn maximally_entangled(d: usize) -> Self {
        let g = gamma_vector(d);
        Self { amplitudes: g.unscale((d as f64).sqrt()), dims: vec![d, d] }
    }

    /// `|ψ⟩ = (X ⊗ I)|Γ⟩`, i.e. amplitudes `ψ_{ra} = X_{ra}`, normalized.
    pub fn from_coefficients(x: &ComplexMatrix) -> Result<Self> {
        let (dr, da) = (x.nrows(), x.ncols());
        let v = ComplexVector::from_iterator(dr * da, (0..dr).flat_map(|r| (0..da).map(move |a| x[(r, a)])));
        Self::normalized(v, vec![dr, da])
    }

    /// Inverse of [`PureState::from_coefficients`] for bipartite states.
    pub fn coefficients(&self) -> Result<ComplexMatrix> {
        if self.dims.len() != 2 {
            return Err(Error::domain("coefficient matrix needs a bipartite state"));
        }
        let (dr, da) = (self.dims[0], self.dims[1]);
        Ok(ComplexMatrix::from_fn(dr, da, |r, a| self.amplitudes[r * da + a]))
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn to_density(&self) -> DensityOperator {
        let m = linalg::outer(&self.amplitudes, &self.amplitudes);
        DensityOperator::from_raw(linalg::hermitian_part(&m), self.dims.clone())
    }
}

/// Unnormalized `|Γ⟩ = Σ_i |i⟩|i⟩` in dimension `d²`.
pub fn gamma_vector(d: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = ONE;
    }
    v
}

/// `|Γ⟩⟨Γ|` on `d × d`; its trace is `d`.
pub fn gamma_projector(d: usize) -> HermitianOperator {
    let g = gamma_vector(d);
    HermitianOperator::from_raw(linalg::outer(&g, &g), vec![d, d])
}

/// Convenience constructor for a real diagonal matrix.
pub fn diag_matrix(values: &[f64]) -> ComplexMatrix {
    let mut m = ComplexMatrix::from_element(values.len(), values.len(), ZERO);
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = Complex64::new(v, 0.0);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::random::{random_state, random_unitary_with};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        linalg::max_abs_diff(a, b) <= tol
    }

    #[test]
    fn support_power_examples() {
        let id = HermitianOperator::identity(vec![2]);
        assert!(close(id.support_power(0.5).unwrap().matrix(), id.matrix(), 1e-15));
        let h = HermitianOperator::diagonal(&[4.0, 0.0]);
        assert!(close(h.support_power(0.5).unwrap().matrix(), &diag_matrix(&[2.0, 0.0]), 1e-14));
        assert!(close(h.support_power(-1.0).unwrap().matrix(), &diag_matrix(&[0.25, 0.0]), 1e-15));
        assert!(close(h.support_power(0.0).unwrap().matrix(), &diag_matrix(&[1.0, 0.0]), 1e-15));
    }

    #[test]
    fn support_power_matches_eigen_reconstruction() {
        // rotate diag(4, 0) into a random basis and compare with U diag(1/4, 0) U†
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = random_unitary_with(2, &mut rng);
        let h = HermitianOperator::from_matrix(&u * diag_matrix(&[4.0, 0.0]) * u.adjoint()).unwrap();
        let expected = &u * diag_matrix(&[0.25, 0.0]) * u.adjoint();
        assert!(close(h.support_power(-1.0).unwrap().matrix(), &expected, 1e-13));
    }

    #[test]
    fn partial_trace_examples() {
        let a = random_state(2, 1);
        let b = random_state(3, 2);
        let ab = a.tensor(&b);
        assert!(close(ab.partial_trace(&[0]).unwrap().matrix(), a.matrix(), 1e-14));
        assert!(close(ab.partial_trace(&[1]).unwrap().matrix(), b.matrix(), 1e-14));

        let phi = PureState::maximally_entangled(2).to_density();
        let half = DensityOperator::maximally_mixed(2);
        assert!(close(phi.partial_trace(&[0]).unwrap().matrix(), half.matrix(), 1e-15));
    }

    #[test]
    fn partial_trace_matches_index_sum() {
        let rho = random_state(6, 7).with_dims(vec![2, 3]).unwrap();
        let reduced = rho.partial_trace(&[1]).unwrap();
        let m = rho.matrix();
        for b1 in 0..3 {
            for b2 in 0..3 {
                let direct: Complex64 = (0..2).map(|a| m[(a * 3 + b1, a * 3 + b2)]).sum();
                assert!((direct - reduced.matrix()[(b1, b2)]).norm() < 1e-15);
            }
        }
        assert!((reduced.trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let rho = random_state(4, 3).with_dims(vec![2, 2]).unwrap();
        assert!(matches!(rho.partial_trace(&[2]), Err(Error::Domain(_))));
        assert!(rho.partial_trace(&[0, 0]).is_err());
    }

    #[test]
    fn permute_swaps_product_factors() {
        let a = random_state(2, 4);
        let b = random_state(3, 5);
        let swapped = a.tensor(&b).permute(&[1, 0]).unwrap();
        assert!(close(swapped.matrix(), b.tensor(&a).matrix(), 1e-15));
        assert_eq!(swapped.dims(), &[3, 2]);
    }

    #[test]
    fn gamma_examples() {
        assert!((gamma_projector(1).trace() - 1.0).abs() < 1e-15);
        assert!((gamma_projector(2).trace() - 2.0).abs() < 1e-15);
        // (ρ^{1/2} ⊗ I) Γ (ρ^{1/2} ⊗ I) with ρ = I/2 is the normalized maximally entangled state
        let half = HermitianOperator::identity(vec![2]).scale(0.5);
        let k = linalg::kron(half.support_power(0.5).unwrap().matrix(), &ComplexMatrix::identity(2, 2));
        let out = gamma_projector(2).sandwich(&k, None).unwrap();
        let phi = PureState::maximally_entangled(2).to_density();
        assert!(close(out.matrix(), phi.matrix(), 1e-15));
    }

    #[test]
    fn conjugate_examples() {
        let y = random_state(2, 9);
        let id = HermitianOperator::identity(vec![2]);
        assert!(close(id.conjugate(&y).unwrap().matrix(), y.matrix(), 1e-14));
        let x = HermitianOperator::diagonal(&[4.0, 0.0]);
        let out = x.conjugate(&id).unwrap();
        assert!(close(out.matrix(), &diag_matrix(&[4.0, 0.0]), 1e-14));
        let neg = HermitianOperator::diagonal(&[1.0, -1.0]);
        assert!(neg.conjugate(&id).is_err());
    }

    #[test]
    fn conjugation_by_sigma_power_on_maximally_entangled() {
        // σ = I/2, α = 2: Θ conjugates by σ^{-1/2}, i.e. multiplies by 2^{1/2} per side pair
        let alpha: f64 = 2.0;
        let sigma = HermitianOperator::identity(vec![2]).scale(0.5);
        let x = sigma.support_power((1.0 - alpha) / alpha).unwrap();
        let xfull = HermitianOperator::identity(vec![2]).tensor(&x);
        let phi = PureState::maximally_entangled(2).to_density();
        let out = xfull.conjugate(&phi).unwrap();
        assert!(close(out.matrix(), &phi.matrix().scale(2f64.sqrt()), 1e-14));
    }

    #[test]
    fn coefficient_round_trip() {
        let x = ComplexMatrix::from_fn(2, 3, |i, j| Complex64::new(i as f64 + 0.5, j as f64 - 1.0));
        let psi = PureState::from_coefficients(&x).unwrap();
        let back = psi.coefficients().unwrap();
        assert!(close(&back, &x.unscale(x.norm()), 1e-15));
    }

    #[test]
    fn density_rejects_invalid_input() {
        assert!(DensityOperator::diagonal(&[0.6, 0.6]).is_err());
        assert!(DensityOperator::diagonal(&[1.2, -0.2]).is_err());
        let mut m = ComplexMatrix::identity(2, 2).scale(0.5);
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(HermitianOperator::from_matrix(m).is_err());
    }

    // eigenvalues in [0.1, 3] plus optional exact zeros, so that powers up to
    // |t| = 4 stay well conditioned
    fn psd_strategy() -> impl Strategy<Value = HermitianOperator> {
        (2usize..5, any::<u64>(), 0usize..3).prop_map(|(d, seed, zeros)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_unitary_with(d, &mut rng);
            let vals: Vec<f64> = (0..d)
                .map(|i| if i < zeros.min(d - 1) { 0.0 } else { 0.1 + 2.9 * rand::Rng::random::<f64>(&mut rng) })
                .collect();
            let m = &u * diag_matrix(&vals) * u.adjoint();
            HermitianOperator::from_matrix(linalg::hermitian_part(&m)).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn support_powers_compose(h in psd_strategy(), a in -4.0f64..4.0, b in -4.0f64..4.0) {
            let pa = h.support_power(a).unwrap();
            let pb = h.support_power(b).unwrap();
            let pab = h.support_power(a + b).unwrap();
            let prod = pa.matrix() * pb.matrix();
            let scale = pab.matrix().iter().fold(1.0f64, |m, z| m.max(z.norm()));
            prop_assert!(linalg::max_abs_diff(&prod, pab.matrix()) <= 1e-8 * scale);
        }

        #[test]
        fn partial_trace_of_product(sa in any::<u64>(), sb in any::<u64>(), da in 1usize..4, db in 1usize..4) {
            let a = random_state(da, sa).scale(1.7);
            let b = random_state(db, sb).scale(0.3);
            let reduced = a.tensor(&b).partial_trace(&[0]).unwrap();
            let expected = a.scale(b.trace());
            prop_assert!(linalg::max_abs_diff(reduced.matrix(), expected.matrix()) <= 1e-12);
        }

        #[test]
        fn gamma_realizes_vec_isomorphism(seed in any::<u64>(), d in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = crate::qmat::random::ginibre_with(d, d, &mut rng);
            let b = crate::qmat::random::ginibre_with(d, d, &mut rng);
            let g = gamma_vector(d);
            let op = linalg::kron(&(a.adjoint() * &b), &ComplexMatrix::identity(d, d));
            let lhs = (g.adjoint() * op * &g)[(0, 0)];
            let rhs = linalg::trace(&(a.adjoint() * &b));
            prop_assert!((lhs - rhs).norm() <= 1e-10);
        }
    }
}
