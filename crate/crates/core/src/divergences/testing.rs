use serde::Serialize;

use super::value::DivergenceValue;
use crate::qmat::json::StateJson;
use crate::qmat::linalg::{self, eigh, ComplexMatrix, Eigh};
use crate::qmat::HermitianOperator;
use crate::{Error, Result};

/// Slack allowed on `0 ≤ Q ≤ I`.
pub const TEST_TOL: f64 = 1e-10;

/// Relative width of the boundary eigenspace of `ρ − tσ` in the Neyman–Pearson test.
pub const NP_BOUNDARY_GAP: f64 = 1e-9;

/// A binary measurement `{Q, I − Q}`; `Q` accepts the first hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryTest {
    q: HermitianOperator,
}

impl BinaryTest {
    pub fn new(q: HermitianOperator) -> Result<Self> {
        let e = q.eigh();
        if e.min() < -TEST_TOL || e.max() > 1.0 + TEST_TOL {
            return Err(Error::domain(format!(
                "test operator spectrum [{:.3e}, {:.3e}] leaves [0, 1]",
                e.min(),
                e.max()
            )));
        }
        Ok(Self { q })
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.q
    }

    /// Type-I error `Tr((I − Q) ρ)`.
    pub fn type1(&self, rho: &HermitianOperator) -> f64 {
        rho.trace() - self.q.expectation(rho)
    }

    /// Type-II error `Tr(Q σ)`.
    pub fn type2(&self, sigma: &HermitianOperator) -> f64 {
        self.q.expectation(sigma)
    }
}

impl Serialize for BinaryTest {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateJson::from(&self.q).serialize(s)
    }
}

/// Outcome of [`hypothesis_testing`]: `D_H^ε` together with an optimal test.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisTestResult {
    pub value: DivergenceValue,
    pub test: BinaryTest,
    pub achieved_type1: f64,
    pub achieved_type2: f64,
}

/// Projectors onto the eigenvectors of `h` in three classes relative to `δ`.
struct Split {
    positive: ComplexMatrix,
    boundary: ComplexMatrix,
}

fn split(e: &Eigh, delta: f64) -> Split {
    Split {
        positive: e.reconstruct(|_| 1.0, |l| l > delta),
        boundary: e.reconstruct(|_| 1.0, |l| l.abs() <= delta),
    }
}

/// Hypothesis-testing relative entropy `D_H^ε(ρ‖σ) = −log β_ε` with its witness.
///
/// `β_ε = min { Tr Qσ : 0 ≤ Q ≤ I, Tr (I−Q)ρ ≤ ε }` is attained by a
/// Neyman–Pearson test `Π_{ρ−tσ>0} + γ Π_{ρ−tσ=0}`. The threshold `t` is
/// found by bisection on the non-increasing map `t ↦ Tr Π_{ρ−tσ>0} ρ` and
/// `γ` is the smallest weight that brings the type-I error down to `ε`.
pub fn hypothesis_testing(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    epsilon: f64,
) -> Result<HypothesisTestResult> {
    if rho.dim() != sigma.dim() {
        return Err(Error::domain("state dimensions differ"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    let es = linalg::eigh_psd(sigma.matrix())?;
    let er = linalg::eigh_psd(rho.matrix())?;
    let target = 1.0 - epsilon;

    let kernel = es.kernel_projector();
    let kernel_mass = linalg::trace_of_product(&kernel, rho.matrix()).re;
    if kernel_mass >= target {
        let test = BinaryTest::new(HermitianOperator::from_raw(kernel, rho.dims().to_vec()))?;
        let t1 = test.type1(rho);
        return Ok(HypothesisTestResult {
            value: DivergenceValue::Infinite,
            achieved_type1: t1,
            achieved_type2: test.type2(sigma).max(0.0),
            test,
        });
    }

    let scale_of = |t: f64| er.max().max(t * es.max());
    let positive_mass = |t: f64| -> (f64, Eigh) {
        let e = eigh(&(rho.matrix() - sigma.matrix().scale(t)));
        let delta = NP_BOUNDARY_GAP * scale_of(t);
        let p = e.reconstruct(|_| 1.0, |l| l > delta);
        (linalg::trace_of_product(&p, rho.matrix()).re, e)
    };

    let min_pos = es.values.iter().copied().filter(|&q| q > es.cutoff()).fold(f64::INFINITY, f64::min);
    let mut lo = 0.0;
    let mut hi = (er.max() / min_pos).max(f64::MIN_POSITIVE);
    let mut doublings = 0;
    while positive_mass(hi).0 > target {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 {
            return Err(Error::domain("Neyman–Pearson threshold search did not terminate"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if positive_mass(mid).0 > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let (_, e) = positive_mass(hi);
    let parts = split(&e, NP_BOUNDARY_GAP * scale_of(hi));
    let a = linalg::trace_of_product(&parts.positive, rho.matrix()).re;
    let b_extra = linalg::trace_of_product(&parts.boundary, rho.matrix()).re;
    let gamma = if b_extra > 0.0 { ((target - a) / b_extra).clamp(0.0, 1.0) } else { 0.0 };
    let q = linalg::hermitian_part(&(parts.positive + parts.boundary.scale(gamma)));
    let test = BinaryTest::new(HermitianOperator::from_raw(q, rho.dims().to_vec()))?;
    let achieved_type1 = test.type1(rho);
    let achieved_type2 = test.type2(sigma).max(0.0);
    let value = if achieved_type2 > 0.0 {
        DivergenceValue::Finite(-achieved_type2.log2())
    } else {
        DivergenceValue::Infinite
    };
    Ok(HypothesisTestResult { value, test, achieved_type1, achieved_type2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::renyi::sandwiched_renyi;
    use crate::qmat::random::{random_state, random_test_operator_with, rng_from_seed};
    use crate::qmat::DensityOperator;

    #[test]
    fn identical_states() {
        let rho = random_state(3, 2);
        for eps in [0.1, 0.5, 0.9] {
            let r = hypothesis_testing(&rho, &rho, eps).unwrap();
            assert!((r.value.value() + (1.0 - eps).log2()).abs() < 1e-9);
            assert!(r.achieved_type1 <= eps + 1e-9);
            // optimal test acts as (1−ε) I on the state
            assert!((r.achieved_type2 - (1.0 - eps)).abs() < 1e-9);
        }
    }

    #[test]
    fn orthogonal_states() {
        let r = hypothesis_testing(&DensityOperator::basis(2, 0), &DensityOperator::basis(2, 1), 0.3).unwrap();
        assert_eq!(r.value, DivergenceValue::Infinite);
        assert!(r.achieved_type1 <= 0.3);
        assert_eq!(r.achieved_type2, 0.0);
    }

    #[test]
    fn canonical_diagonal_pair() {
        let p = DensityOperator::diagonal(&[0.5, 0.5]).unwrap();
        let q = DensityOperator::diagonal(&[0.25, 0.75]).unwrap();
        let r = hypothesis_testing(&p, &q, 0.5).unwrap();
        assert!((r.value.value() - 2.0).abs() < 1e-9);
        assert!((r.achieved_type2 - 0.25).abs() < 1e-9);
        let q0 = r.test.operator().matrix();
        assert!((q0[(0, 0)].re - 1.0).abs() < 1e-9 && q0[(1, 1)].re.abs() < 1e-9);
    }

    #[test]
    fn beats_random_feasible_tests() {
        let mut rng = rng_from_seed(99);
        for seed in 0..5 {
            let rho = random_state(2, seed);
            let sigma = random_state(2, seed + 100);
            let eps = 0.2;
            let r = hypothesis_testing(&rho, &sigma, eps).unwrap();
            assert!(r.achieved_type1 <= eps + 1e-9);
            for _ in 0..2000 {
                let q = HermitianOperator::from_raw(random_test_operator_with(2, &mut rng), vec![2]);
                let t = BinaryTest::new(q).unwrap();
                if t.type1(&rho) <= eps {
                    assert!(t.type2(&sigma) >= r.achieved_type2 - 1e-12);
                }
            }
        }
    }

    #[test]
    fn bounded_by_sandwiched_divergence() {
        for seed in 0..20 {
            let rho = random_state(3, seed);
            let sigma = random_state(3, seed + 50);
            for eps in [0.05, 0.3, 0.7] {
                let dh = hypothesis_testing(&rho, &sigma, eps).unwrap().value.value();
                for a in [1.5, 2.0, 4.0] {
                    let bound = sandwiched_renyi(&rho, &sigma, a).unwrap().value() + a / (a - 1.0) * (1.0 / (1.0 - eps)).log2();
                    assert!(dh <= bound + 1e-8);
                }
            }
        }
    }

    #[test]
    fn rejects_invalid_tests() {
        assert!(BinaryTest::new(HermitianOperator::diagonal(&[1.2, 0.0])).is_err());
        assert!(BinaryTest::new(HermitianOperator::diagonal(&[-0.1, 0.5])).is_err());
        assert!(hypothesis_testing(&random_state(2, 1), &random_state(2, 2), 1.0).is_err());
    }
}
