//! Dense complex kernels.
//!
//! Every matrix function in the crate routes through [`eigh`], a cyclic
//! Jacobi eigensolver for Hermitian matrices. Jacobi is slow compared with
//! tridiagonal QR but has excellent relative accuracy for small eigenvalues,
//! which is what support detection needs, and our matrices never exceed
//! 64 × 64.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

/// Dense complex matrix, the storage type for every operator.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Dense complex vector.
pub type ComplexVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default relative cutoff below which eigenvalues count as zero.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// Default tolerance on negative eigenvalues of a PSD input.
pub const PSD_TOL: f64 = 1e-10;

/// Default tolerance on `‖M − M†‖_∞` for Hermitian inputs.
pub const HERMITICITY_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 60;

/// Eigendecomposition of a Hermitian matrix: `M = V diag(values) V†`.
///
/// Eigenvalues are sorted in ascending order; column `k` of `vectors` is
/// the eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigh {
    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Absolute threshold below which eigenvalues count as zero.
    pub fn cutoff(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        SUPPORT_CUTOFF * scale
    }

    /// `Σ f(λ_k) v_k v_k†` over the eigenpairs selected by `keep`.
    pub fn reconstruct<F, K>(&self, f: F, keep: K) -> ComplexMatrix
    where
        F: Fn(f64) -> f64,
        K: Fn(f64) -> bool,
    {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            if !keep(lam) {
                continue;
            }
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            let v = self.vectors.column(k);
            for j in 0..n {
                let vj = v[j].conj() * w;
                if vj == ZERO {
                    continue;
                }
                for i in 0..n {
                    out[(i, j)] += v[i] * vj;
                }
            }
        }
        out
    }

    /// Projector onto the eigenvectors with `λ > cutoff`.
    pub fn support_projector(&self) -> ComplexMatrix {
        let cut = self.cutoff();
        self.reconstruct(|_| 1.0, |l| l > cut)
    }

    /// Projector onto the eigenvectors with `λ ≤ cutoff` (the kernel of a PSD matrix).
    pub fn kernel_projector(&self) -> ComplexMatrix {
        let cut = self.cutoff();
        self.reconstruct(|_| 1.0, |l| l <= cut)
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Only the Hermitian part of `m` is used.
pub fn eigh(m: &ComplexMatrix) -> Eigh {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigh needs a square matrix");
    let mut a = hermitian_part(m);
    let mut v = ComplexMatrix::identity(n, n);

    let frob: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if frob == 0.0 || n == 1 {
        let values = (0..n).map(|i| a[(i, i)].re).collect();
        return Eigh { values, vectors: v };
    }

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * frob {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &v.column(i));
    }
    Eigh { values, vectors }
}

/// One Jacobi rotation zeroing `a[(p, q)]`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let b = a[(p, q)];
    let babs = b.norm();
    if babs == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // skip rotations that cannot change the diagonal in floating point
    if babs < 1e-300 || (babs < 1e-18 * app.abs() && babs < 1e-18 * aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    // A = P Ã P† with P = diag(1, e^{-iφ}) makes the (p, q) block real.
    let phase = Complex64::from_polar(1.0, -b.arg());
    let theta = (aqq - app) / (2.0 * babs);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // V restricted to (p, q): [[c, s], [-s e, c e]] with e = e^{-iφ}
    let vpp = Complex64::new(c, 0.0);
    let vpq = Complex64::new(s, 0.0);
    let vqp = -phase * s;
    let vqq = phase * c;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * vpp + akq * vqp;
        a[(k, q)] = akp * vpq + akq * vqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = vpp.conj() * apk + vqp.conj() * aqk;
        a[(q, k)] = vpq.conj() * apk + vqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * vpp + vkq * vqp;
        v[(k, q)] = vkp * vpq + vkq * vqq;
    }
}

/// `(M + M†) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// `max |M − M†|` over entries.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(A B)` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Checks PSD-ness of a spectrum and returns the decomposition.
pub fn eigh_psd(m: &ComplexMatrix) -> Result<Eigh> {
    let e = eigh(m);
    let scale = e.max().abs().max(1.0);
    if e.min() < -PSD_TOL * scale {
        return Err(Error::domain(format!(
            "operator is not positive semidefinite (min eigenvalue {:.3e})",
            e.min()
        )));
    }
    Ok(e)
}

/// `X^t` on the support of a PSD matrix; `t = 0` gives the support projector.
pub fn psd_power(m: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let e = eigh_psd(m)?;
    Ok(power_from_eigh(&e, t))
}

pub(crate) fn power_from_eigh(e: &Eigh, t: f64) -> ComplexMatrix {
    let cut = e.cutoff();
    e.reconstruct(|l| if t == 0.0 { 1.0 } else { l.powf(t) }, |l| l > cut)
}

/// `X^{1/2} Y X^{1/2}` with the support-power convention.
pub fn conjugate_by_sqrt(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    let r = psd_power(x, 0.5)?;
    Ok(&r * y * &r)
}

/// Singular values, descending.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let square = m.nrows() == m.ncols();
    let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let mut sv: Vec<f64> = if square && hermiticity_defect(m) <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        eigh(m).values.iter().map(|v| v.abs()).collect()
    } else {
        let g = if m.nrows() >= m.ncols() {
            m.adjoint() * m
        } else {
            m * m.adjoint()
        };
        eigh(&g).values.iter().map(|v| v.max(0.0).sqrt()).collect()
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Base-2 logarithm of the Schatten α-(quasi-)norm, evaluated in the log
/// domain so that large orders do not overflow. Returns `-inf` for `M = 0`.
pub fn log2_schatten_from_singular(sv: &[f64], alpha: f64) -> f64 {
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    if smax == 0.0 {
        return f64::NEG_INFINITY;
    }
    if alpha.is_infinite() {
        return smax.log2();
    }
    let sum: f64 = sv.iter().filter(|&&s| s > 0.0).map(|&s| (s / smax).powf(alpha)).sum();
    smax.log2() + sum.log2() / alpha
}

/// Schatten α-norm `(Σ s_k^α)^{1/α}`; for `α ∈ (0, 1)` this is the quasi-norm.
pub fn schatten_norm(m: &ComplexMatrix, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("Schatten order must be positive, got {alpha}")));
    }
    let sv = singular_values(m);
    Ok(log2_schatten_from_singular(&sv, alpha).exp2())
}

/// Unit vector `e_i` in dimension `d`.
pub fn basis_vector(d: usize, i: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(d);
    v[i] = ONE;
    v
}

pub fn outer(u: &ComplexVector, v: &ComplexVector) -> ComplexMatrix {
    u * v.adjoint()
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &ComplexMatrix) -> f64 {
    eigh(m).values.iter().map(|v| v.abs()).sum()
}
