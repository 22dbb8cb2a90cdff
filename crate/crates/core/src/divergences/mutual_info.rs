use super::renyi::{relative_entropy, renyi_auto, ALPHA_ONE_WINDOW};
use super::value::{AlphaStar, DivergenceValue, RenyiFamily};
use crate::channel::report::ExponentReport;
use crate::optimize::{density_from_g, optimize_state, Sense, StateSearch};
use crate::qmat::{ComplexMatrix, DensityOperator, HermitianOperator};
use crate::{Error, Result};

/// Bloch-grid resolution used to certify the inner minimization when `d_B = 2`.
pub const DEFAULT_GRID: usize = 40;

/// `D_α(ρ_RB ‖ ρ_R ⊗ σ_B)` with `σ_B = G G†`; `+∞` maps to `f64::INFINITY`.
pub(crate) fn mutual_information_objective(
    rho_rb: &HermitianOperator,
    rho_r: &HermitianOperator,
    alpha: f64,
    family: RenyiFamily,
    g_sigma: &ComplexMatrix,
) -> f64 {
    let sigma = density_from_g(g_sigma);
    let product = rho_r.tensor(&sigma);
    match renyi_auto(rho_rb, &product, alpha, family) {
        Ok(v) => v.value(),
        Err(_) => f64::NAN,
    }
}

/// Rényi mutual information `inf_σ D_α(ρ_RB ‖ ρ_R ⊗ σ_B)` of a bipartite state.
///
/// At `α = 1` the infimum is attained at `σ_B = ρ_B` and the ordinary
/// mutual information is returned. Otherwise the convex inner problem is
/// solved by multi-start descent, certified on a Bloch grid when `d_B = 2`.
pub fn renyi_mutual_information(rho_rb: &DensityOperator, alpha: f64, family: RenyiFamily) -> Result<ExponentReport> {
    renyi_mutual_information_with(rho_rb, alpha, family, &StateSearch::default().with_grid(DEFAULT_GRID))
}

/// [`renyi_mutual_information`] with an explicit search configuration.
pub fn renyi_mutual_information_with(
    rho_rb: &DensityOperator,
    alpha: f64,
    family: RenyiFamily,
    search: &StateSearch,
) -> Result<ExponentReport> {
    if rho_rb.dims().len() != 2 {
        return Err(Error::domain("mutual information needs a state with exactly two subsystems"));
    }
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("Rényi order must be positive, got {alpha}")));
    }
    let quantity = "renyi_mutual_information";
    let rho_r = rho_rb.partial_trace(&[0])?;
    let rho_b = rho_rb.partial_trace(&[1])?;
    if (alpha - 1.0).abs() < ALPHA_ONE_WINDOW {
        let v = relative_entropy(rho_rb, &rho_r.tensor(&rho_b))?;
        let mut rep = ExponentReport::new(quantity, v).with_alpha(AlphaStar::Value(1.0));
        rep.sigma_star = Some(rho_b.with_dims(vec![rho_b.dim()])?);
        rep.tolerance = 1e-12;
        return Ok(rep);
    }
    let d_b = rho_rb.dims()[1];
    let mixed = DensityOperator::maximally_mixed(d_b);
    if !renyi_auto(rho_rb, &rho_r.tensor(&mixed), alpha, family)?.is_finite() {
        // the maximally mixed σ has the largest support, so every σ fails
        let mut rep = ExponentReport::infinite(quantity).with_alpha(AlphaStar::Value(alpha));
        rep.sigma_star = Some(mixed);
        return Ok(rep);
    }
    let f = |g: &ComplexMatrix| mutual_information_objective(rho_rb, &rho_r, alpha, family, g);
    let mut search = search.clone();
    search.warm_starts.insert(0, crate::optimize::g_from_density(&rho_b.with_dims(vec![d_b])?));
    let opt = optimize_state(d_b, Sense::Minimize, f, &search);
    let mut rep = ExponentReport::new(quantity, DivergenceValue::Finite(opt.value)).with_alpha(AlphaStar::Value(alpha));
    rep.sigma_star = Some(opt.state());
    rep.gap_certificate = opt.grid_gap;
    rep.iterations = opt.iterations;
    rep.winning_start = opt.winning_start;
    rep.flags.heuristic = family == RenyiFamily::Sandwiched && alpha < 0.5;
    Ok(rep)
}
