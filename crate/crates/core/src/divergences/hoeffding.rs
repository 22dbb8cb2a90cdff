use super::renyi::{max_relative_entropy, petz_renyi, relative_entropy, sandwiched_renyi};
use super::value::{AlphaStar, DivergenceValue};
use crate::optimize::golden_section_max;
use crate::qmat::HermitianOperator;
use crate::{Error, Result};

/// Interior of the `u = (α−1)/α` chart searched by golden section; the
/// endpoints themselves are evaluated exactly where a closed form exists.
pub const U_INTERIOR: (f64, f64) = (1e-6, 1.0 - 1e-6);

/// Bracket width at which golden-section searches stop.
pub const GOLDEN_TOL: f64 = 1e-9;

/// Value of a supremum over the Rényi order, with where it was approached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderOptimum {
    pub value: DivergenceValue,
    pub alpha_star: AlphaStar,
}

fn check_rate(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("rate must be positive and finite, got {r}")));
    }
    Ok(())
}

/// Hoeffding divergence `H_r = sup_{0<α<1} ((α−1)/α)(r − D_α(ρ‖σ))` (Petz family).
///
/// The objective is concave in `s = (1−α)/α`, hence unimodal in `α`. It
/// diverges as `α → 0` exactly when `r < D_0(ρ‖σ) = −log Tr Π_ρ σ`.
pub fn hoeffding_divergence(rho: &HermitianOperator, sigma: &HermitianOperator, r: f64) -> Result<OrderOptimum> {
    check_rate(r)?;
    let d0 = petz_renyi(rho, sigma, 0.0)?;
    let Some(d0) = d0.finite() else {
        return Ok(OrderOptimum { value: DivergenceValue::Infinite, alpha_star: AlphaStar::LimitZero });
    };
    if r < d0 {
        return Ok(OrderOptimum { value: DivergenceValue::Infinite, alpha_star: AlphaStar::LimitZero });
    }
    let f = |alpha: f64| -> f64 {
        match petz_renyi(rho, sigma, alpha) {
            Ok(DivergenceValue::Finite(d)) => (alpha - 1.0) / alpha * (r - d),
            _ => f64::NEG_INFINITY,
        }
    };
    let (lo, hi) = U_INTERIOR;
    let (a_star, best) = golden_section_max(f, lo, hi, GOLDEN_TOL);
    let at_zero = f(lo);
    let (value, alpha_star) = if best <= 0.0 && at_zero <= 0.0 {
        (0.0, AlphaStar::LimitOne)
    } else if at_zero > best {
        (at_zero, AlphaStar::LimitZero)
    } else {
        (best, AlphaStar::Value(a_star))
    };
    Ok(OrderOptimum { value: DivergenceValue::Finite(value), alpha_star })
}

/// Hoeffding anti-divergence `H*_r = sup_{α>1} ((α−1)/α)(r − D̃_α(ρ‖σ))`.
///
/// Maximized over `u = (α−1)/α ∈ (0,1)` where `u ↦ u(r − D̃_{1/(1−u)})` is
/// concave. The limits `u → 0` (value 0) and `u → 1` (value `r − D_max`)
/// are included, so the supremum is returned even when it is not attained.
/// When `supp ρ ⊄ supp σ` every term is `−∞` and the value is reported as 0,
/// the `α → 1` limit.
pub fn hoeffding_anti_divergence(rho: &HermitianOperator, sigma: &HermitianOperator, r: f64) -> Result<OrderOptimum> {
    check_rate(r)?;
    let dmax = max_relative_entropy(rho, sigma)?;
    let Some(dmax) = dmax.finite() else {
        return Ok(OrderOptimum { value: DivergenceValue::ZERO, alpha_star: AlphaStar::LimitOne });
    };
    let d = relative_entropy(rho, sigma)?.value();
    if r <= d {
        return Ok(OrderOptimum { value: DivergenceValue::ZERO, alpha_star: AlphaStar::LimitOne });
    }
    let g = |u: f64| -> f64 {
        match sandwiched_renyi(rho, sigma, 1.0 / (1.0 - u)) {
            Ok(DivergenceValue::Finite(v)) => u * (r - v),
            _ => f64::NEG_INFINITY,
        }
    };
    let (lo, hi) = U_INTERIOR;
    let (u_star, best) = golden_section_max(g, lo, hi, GOLDEN_TOL);
    let at_one = r - dmax;
    let (value, alpha_star) = if best <= 0.0 && at_one <= 0.0 {
        (0.0, AlphaStar::LimitOne)
    } else if at_one >= best {
        (at_one, AlphaStar::Infinity)
    } else {
        (best, AlphaStar::Value(1.0 / (1.0 - u_star)))
    };
    Ok(OrderOptimum { value: DivergenceValue::Finite(value), alpha_star })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::random::random_state;
    use crate::qmat::DensityOperator;

    #[test]
    fn hoeffding_examples() {
        let rho = random_state(2, 3);
        assert!(hoeffding_divergence(&rho, &rho, 0.4).unwrap().value.value().abs() < 1e-12);
        let z = DensityOperator::basis(2, 0);
        let half = DensityOperator::maximally_mixed(2);
        assert!(hoeffding_divergence(&z, &half, 2.0).unwrap().value.value().abs() < 1e-12);
        let h = hoeffding_divergence(&z, &half, 0.5).unwrap();
        assert_eq!(h.value, DivergenceValue::Infinite);
        assert_eq!(h.alpha_star, AlphaStar::LimitZero);
    }

    #[test]
    fn anti_divergence_examples() {
        let rho = random_state(2, 5);
        let h = hoeffding_anti_divergence(&rho, &rho, 0.7).unwrap();
        assert!((h.value.value() - 0.7).abs() < 1e-9);
        assert_eq!(h.alpha_star, AlphaStar::Infinity);
        let z = DensityOperator::basis(2, 0);
        let half = DensityOperator::maximally_mixed(2);
        assert!((hoeffding_anti_divergence(&z, &half, 2.0).unwrap().value.value() - 1.0).abs() < 1e-9);
        let sigma = random_state(2, 6);
        let d = relative_entropy(&rho, &sigma).unwrap().value();
        assert_eq!(hoeffding_anti_divergence(&rho, &sigma, 0.9 * d).unwrap().value, DivergenceValue::ZERO);
    }

    /// Brute-force oracle: dense scan of α.
    fn anti_divergence_scan(rho: &HermitianOperator, sigma: &HermitianOperator, r: f64) -> f64 {
        let mut best = 0.0f64;
        for k in 1..4000 {
            let u = k as f64 / 4000.0;
            let d = sandwiched_renyi(rho, sigma, 1.0 / (1.0 - u)).unwrap().value();
            best = best.max(u * (r - d));
        }
        best.max(r - max_relative_entropy(rho, sigma).unwrap().value())
    }

    fn hoeffding_scan(rho: &HermitianOperator, sigma: &HermitianOperator, r: f64) -> f64 {
        let mut best = 0.0f64;
        for k in 1..4000 {
            let a = k as f64 / 4000.0;
            let d = petz_renyi(rho, sigma, a).unwrap().value();
            best = best.max((a - 1.0) / a * (r - d));
        }
        best
    }

    #[test]
    fn golden_section_agrees_with_scans() {
        for seed in 0..6 {
            let rho = random_state(2, seed);
            let sigma = random_state(2, seed + 10);
            let d = relative_entropy(&rho, &sigma).unwrap().value();
            for r in [0.5 * d + 0.01, d + 0.3, d + 2.0] {
                let h = hoeffding_anti_divergence(&rho, &sigma, r).unwrap().value.value();
                let scan = anti_divergence_scan(&rho, &sigma, r);
                assert!(h >= scan - 1e-9 && h <= scan + 1e-3, "{h} vs {scan}");
                let h = hoeffding_divergence(&rho, &sigma, r).unwrap().value.value();
                let scan = hoeffding_scan(&rho, &sigma, r);
                assert!(h >= scan - 1e-9 && h <= scan + 1e-3, "{h} vs {scan}");
            }
        }
    }

    #[test]
    fn rejects_bad_rate() {
        let rho = random_state(2, 1);
        assert!(hoeffding_divergence(&rho, &rho, 0.0).is_err());
        assert!(hoeffding_anti_divergence(&rho, &rho, -1.0).is_err());
    }
}
