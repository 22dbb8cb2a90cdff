use num_complex::Complex64;

use super::value::{DivergenceValue, RenyiFamily};
use crate::qmat::linalg::{self, eigh, eigh_psd, ComplexMatrix, Eigh};
use crate::qmat::HermitianOperator;
use crate::{Error, Result};

/// Fraction of `Tr ρ` allowed outside `supp σ` before a support condition counts as violated.
pub const SUPPORT_LEAK_TOL: f64 = 1e-12;

/// Half-width of the window around `α = 1` where [`renyi_auto`] returns the relative entropy.
pub const ALPHA_ONE_WINDOW: f64 = 1e-6;

fn check_pair(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::domain(format!(
            "state dimensions differ: {} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(())
}

fn positive_trace(rho_eig: &Eigh) -> Result<f64> {
    let tr: f64 = rho_eig.values.iter().filter(|&&v| v > 0.0).sum();
    if !(tr > 0.0) {
        return Err(Error::domain("first argument must have positive trace"));
    }
    Ok(tr)
}

/// `|⟨u_i|v_j⟩|²` for eigenbases `u` of ρ and `v` of σ.
fn overlaps(a: &Eigh, b: &Eigh) -> ComplexMatrix {
    a.vectors.adjoint() * &b.vectors
}

/// Mass of ρ on the kernel of σ and on its support.
fn support_masses(rho: &HermitianOperator, sigma_eig: &Eigh) -> (f64, f64) {
    let cut = sigma_eig.cutoff();
    let rv = rho.matrix() * &sigma_eig.vectors;
    let mut on_kernel = 0.0;
    let mut on_support = 0.0;
    for (j, &q) in sigma_eig.values.iter().enumerate() {
        let v = sigma_eig.vectors.column(j);
        let diag: Complex64 = v.dotc(&rv.column(j));
        if q > cut {
            on_support += diag.re;
        } else {
            on_kernel += diag.re;
        }
    }
    (on_kernel.max(0.0), on_support.max(0.0))
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Umegaki relative entropy `D(ρ‖σ) = (1/Tr ρ) Tr ρ(log ρ − log σ)` in bits.
///
/// Returns `+∞` when `supp ρ ⊄ supp σ`.
pub fn relative_entropy(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<DivergenceValue> {
    check_pair(rho, sigma)?;
    let er = eigh_psd(rho.matrix())?;
    let es = eigh_psd(sigma.matrix())?;
    let tr = positive_trace(&er)?;
    let (leak, _) = support_masses(rho, &es);
    if leak > SUPPORT_LEAK_TOL * tr {
        return Ok(DivergenceValue::Infinite);
    }
    let (cr, cs) = (er.cutoff(), es.cutoff());
    let w = overlaps(&er, &es);
    let mut acc = 0.0;
    for (i, &p) in er.values.iter().enumerate() {
        if p <= cr {
            continue;
        }
        acc += p * p.log2();
        for (j, &q) in es.values.iter().enumerate() {
            if q > cs {
                acc -= p * w[(i, j)].norm_sqr() * q.log2();
            }
        }
    }
    Ok(DivergenceValue::Finite(acc / tr))
}

fn check_alpha(alpha: f64, allow_zero: bool) -> Result<()> {
    if alpha.is_nan() || alpha < 0.0 || (alpha == 0.0 && !allow_zero) {
        return Err(Error::domain(format!("Rényi order must be positive, got {alpha}")));
    }
    if alpha == 1.0 {
        return Err(Error::domain("α = 1 is the relative entropy; use relative_entropy or renyi_auto"));
    }
    Ok(())
}

/// Petz Rényi divergence `(1/(α−1)) log[(1/Tr ρ) Tr ρ^α σ^{1−α}]` for `α ∈ [0,1) ∪ (1,∞)`.
///
/// `+∞` when `ρ ⊥ σ`, or when `α > 1` and `supp ρ ⊄ supp σ`.
pub fn petz_renyi(rho: &HermitianOperator, sigma: &HermitianOperator, alpha: f64) -> Result<DivergenceValue> {
    check_pair(rho, sigma)?;
    check_alpha(alpha, true)?;
    if alpha.is_infinite() {
        return Err(Error::domain("the Petz family is not defined at α = ∞"));
    }
    let er = eigh_psd(rho.matrix())?;
    let es = eigh_psd(sigma.matrix())?;
    let tr = positive_trace(&er)?;
    let (leak, inside) = support_masses(rho, &es);
    if (alpha > 1.0 && leak > SUPPORT_LEAK_TOL * tr) || inside <= SUPPORT_LEAK_TOL * tr {
        return Ok(DivergenceValue::Infinite);
    }
    let (cr, cs) = (er.cutoff(), es.cutoff());
    let w = overlaps(&er, &es);
    let mut terms = Vec::with_capacity(er.values.len() * es.values.len());
    for (i, &p) in er.values.iter().enumerate() {
        if p <= cr {
            continue;
        }
        for (j, &q) in es.values.iter().enumerate() {
            let wij = w[(i, j)].norm_sqr();
            if q > cs && wij > 0.0 {
                terms.push(wij.ln() + alpha * p.ln() + (1.0 - alpha) * q.ln());
            }
        }
    }
    let ln_q = log_sum_exp(&terms);
    if ln_q == f64::NEG_INFINITY {
        return Ok(DivergenceValue::Infinite);
    }
    let value = (ln_q - tr.ln()) / std::f64::consts::LN_2 / (alpha - 1.0);
    Ok(DivergenceValue::Finite(value))
}

/// `σ^γ ρ σ^γ` restricted to `supp σ` (in σ's eigenbasis), with `Tr ρ`.
struct Sandwich {
    m: ComplexMatrix,
    trace_rho: f64,
}

enum SandwichOutcome {
    Infinite,
    Finite(Sandwich),
}

fn sandwich(rho: &HermitianOperator, sigma: &HermitianOperator, alpha: f64, gamma: f64) -> Result<SandwichOutcome> {
    let es = eigh_psd(sigma.matrix())?;
    let tr = rho.trace();
    if !(tr > 0.0) {
        return Err(Error::domain("first argument must have positive trace"));
    }
    let er_min = eigh(rho.matrix()).min();
    if er_min < -linalg::PSD_TOL * tr.max(1.0) {
        return Err(Error::domain("first argument is not positive semidefinite"));
    }
    let (leak, inside) = support_masses(rho, &es);
    if (alpha > 1.0 && leak > SUPPORT_LEAK_TOL * tr) || inside <= SUPPORT_LEAK_TOL * tr {
        return Ok(SandwichOutcome::Infinite);
    }
    let cut = es.cutoff();
    let support: Vec<usize> = (0..es.values.len()).filter(|&j| es.values[j] > cut).collect();
    let k = support.len();
    let mut vs = ComplexMatrix::zeros(sigma.dim(), k);
    for (c, &j) in support.iter().enumerate() {
        vs.set_column(c, &es.vectors.column(j).scale(es.values[j].powf(gamma)));
    }
    let m = vs.adjoint() * rho.matrix() * &vs;
    Ok(SandwichOutcome::Finite(Sandwich { m: linalg::hermitian_part(&m), trace_rho: tr }))
}

/// Sandwiched Rényi divergence for `α ∈ (0,1) ∪ (1,∞]`, in norm form
/// `(α/(α−1)) log ‖σ^{(1−α)/2α} ρ σ^{(1−α)/2α}‖_α − log(Tr ρ)/(α−1)`.
///
/// The norm is evaluated in the log domain, so very large orders are
/// stable; `α = ∞` gives the max-relative entropy.
pub fn sandwiched_renyi(rho: &HermitianOperator, sigma: &HermitianOperator, alpha: f64) -> Result<DivergenceValue> {
    check_pair(rho, sigma)?;
    check_alpha(alpha, false)?;
    if alpha.is_infinite() {
        return max_relative_entropy(rho, sigma);
    }
    let gamma = (1.0 - alpha) / (2.0 * alpha);
    let s = match sandwich(rho, sigma, alpha, gamma)? {
        SandwichOutcome::Infinite => return Ok(DivergenceValue::Infinite),
        SandwichOutcome::Finite(s) => s,
    };
    // support convention: eigenvalues at rounding level would otherwise leak in as μ^α for α < 1
    let em = eigh(&s.m);
    let cut = em.cutoff();
    let mu: Vec<f64> = em.values.iter().map(|&v| if v > cut { v } else { 0.0 }).collect();
    let log_norm = linalg::log2_schatten_from_singular(&mu, alpha);
    if log_norm == f64::NEG_INFINITY {
        return Ok(DivergenceValue::Infinite);
    }
    let value = alpha / (alpha - 1.0) * log_norm - s.trace_rho.log2() / (alpha - 1.0);
    Ok(DivergenceValue::Finite(value))
}

/// Sandwiched divergence evaluated straight from its trace definition
/// `(1/(α−1)) log[(1/Tr ρ) Tr (σ^γ ρ σ^γ)^α]`, `γ = (1−α)/2α`, using operator
/// support powers. Slower and less stable than [`sandwiched_renyi`] for
/// large `α`; kept as a reference evaluation.
pub fn sandwiched_renyi_trace_form(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
) -> Result<DivergenceValue> {
    check_pair(rho, sigma)?;
    check_alpha(alpha, false)?;
    if alpha.is_infinite() {
        return Err(Error::domain("trace form needs a finite order"));
    }
    let es = eigh_psd(sigma.matrix())?;
    let tr = rho.trace();
    let (leak, inside) = support_masses(rho, &es);
    if (alpha > 1.0 && leak > SUPPORT_LEAK_TOL * tr) || inside <= SUPPORT_LEAK_TOL * tr {
        return Ok(DivergenceValue::Infinite);
    }
    let s = sigma.support_power((1.0 - alpha) / (2.0 * alpha))?;
    let m = HermitianOperator::from_matrix(linalg::hermitian_part(&(s.matrix() * rho.matrix() * s.matrix())))?;
    let q = m.support_power(alpha)?.trace();
    Ok(DivergenceValue::Finite((q / tr).log2() / (alpha - 1.0)))
}

/// `D_max(ρ‖σ) = log λ_max(σ^{-1/2} ρ σ^{-1/2})`, the `α → ∞` limit of the sandwiched family.
pub fn max_relative_entropy(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<DivergenceValue> {
    check_pair(rho, sigma)?;
    let s = match sandwich(rho, sigma, f64::INFINITY, -0.5)? {
        SandwichOutcome::Infinite => return Ok(DivergenceValue::Infinite),
        SandwichOutcome::Finite(s) => s,
    };
    Ok(DivergenceValue::Finite(eigh(&s.m).max().log2()))
}

/// Either Rényi family at any order `α > 0`; inside `|α − 1| < 1e-6` the
/// relative entropy is returned, which is the common limit of both families.
pub fn renyi_auto(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
    family: RenyiFamily,
) -> Result<DivergenceValue> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("Rényi order must be positive, got {alpha}")));
    }
    if (alpha - 1.0).abs() < ALPHA_ONE_WINDOW {
        return relative_entropy(rho, sigma);
    }
    match family {
        RenyiFamily::Petz => petz_renyi(rho, sigma, alpha),
        RenyiFamily::Sandwiched => sandwiched_renyi(rho, sigma, alpha),
    }
}
