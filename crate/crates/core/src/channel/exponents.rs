use serde::Serialize;

use super::divergence::{
    channel_max_relative_entropy, channel_relative_entropy_with, finiteness_check, optimize_pair, ChannelPair, SecondChannel,
    DEFAULT_GRID,
};
use super::mutual::{
    channel_mutual_information_with, replacer_set_divergence_with, NESTED_GRID, SINGLE_GRID,
};
use super::report::ExponentReport;
use crate::divergences::hoeffding::U_INTERIOR;
use crate::divergences::{
    hoeffding_anti_divergence, renyi_mutual_information_with, AlphaStar, DivergenceValue, RenyiFamily,
};
use crate::optimize::{density_from_g, g_from_density, golden_section_max, optimize_state, Sense, StateSearch};
use crate::qmat::random::random_state;
use crate::qmat::{ComplexMatrix, DensityOperator, KrausChannel, ReplacerSpec};
use crate::{Error, Result};

/// Bracket width of golden-section sweeps over `u = (α−1)/α` at the channel level.
pub const SWEEP_TOL: f64 = 1e-7;

/// Range of `u` for sweeps whose `u → 1` endpoint has no closed form. Near
/// either end the nested optimizations lose accuracy (cancellation as
/// `α → 1`, a non-smooth max-divergence as `α → ∞`).
pub const NESTED_U_RANGE: (f64, f64) = (1e-4, 1.0 - 1e-4);

/// How much work an exponent computation does beyond the primal sweep.
#[derive(Debug, Clone)]
pub struct ExponentOptions {
    /// Search used for the final, certified evaluation at the optimal order.
    pub search: StateSearch,
    /// Also evaluate the formula with the optimizations swapped.
    pub dual: bool,
    /// Re-evaluate the optimum with the full search (multi-start and Bloch grid).
    pub certify: bool,
}

impl Default for ExponentOptions {
    fn default() -> Self {
        Self { search: StateSearch::default(), dual: true, certify: true }
    }
}

impl ExponentOptions {
    /// Primal sweep only, with a light search.
    pub fn fast() -> Self {
        Self { search: StateSearch::default().with_starts(2), dual: false, certify: false }
    }
}

fn check_rate(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("rate must be positive and finite, got {r}")));
    }
    Ok(())
}

/// Result of `sup_{u∈(0,1)} u (r − D(u))`.
struct OrderSweep {
    value: f64,
    alpha_star: AlphaStar,
}

/// Golden-section maximization of `u (r − D_{1/(1−u)})`, concave in `u`, with
/// the `u → 0` limit (value 0) and an optional exact `u → 1` endpoint `r − D_∞`.
fn sweep_order<F: FnMut(f64) -> f64>(r: f64, mut d_at: F, d_infinity: Option<f64>) -> OrderSweep {
    let (lo, hi) = if d_infinity.is_some() { U_INTERIOR } else { NESTED_U_RANGE };
    let (u_star, best) = golden_section_max(|u| u * (r - d_at(1.0 / (1.0 - u))), lo, hi, SWEEP_TOL);
    let at_one = d_infinity.map(|d| r - d).unwrap_or(f64::NEG_INFINITY);
    if best <= 0.0 && at_one <= 0.0 {
        OrderSweep { value: 0.0, alpha_star: AlphaStar::LimitOne }
    } else if at_one >= best {
        OrderSweep { value: at_one, alpha_star: AlphaStar::Infinity }
    } else {
        OrderSweep { value: best, alpha_star: AlphaStar::Value(1.0 / (1.0 - u_star)) }
    }
}

/// Optimal type-II decay rate of adaptive discrimination against a replacer,
/// `D(𝒩‖ℛ_σ)`.
pub fn stein_exponent(ch: &KrausChannel, sigma: &ReplacerSpec) -> Result<ExponentReport> {
    let mut rep = channel_relative_entropy_with(ch, sigma, &StateSearch::default().with_grid(DEFAULT_GRID))?;
    rep.quantity = "stein_exponent".into();
    Ok(rep)
}

/// Strong converse exponent `sc(r) = sup_{α>1} ((α−1)/α)(r − D̃_α(𝒩‖ℛ_σ))`.
pub fn strong_converse_exponent(ch: &KrausChannel, sigma: &ReplacerSpec, r: f64) -> Result<ExponentReport> {
    strong_converse_exponent_with(ch, sigma, r, &ExponentOptions::default())
}

/// [`strong_converse_exponent`] with explicit options.
///
/// With `opts.dual` the swapped form `inf_ρ sup_{α>1}` (the state-level
/// anti-divergence minimized over inputs) is evaluated as well and stored in
/// `dual_value`; the gap certificate covers both this discrepancy and the
/// grid check of the optimal input.
pub fn strong_converse_exponent_with(
    ch: &KrausChannel,
    sigma: &ReplacerSpec,
    r: f64,
    opts: &ExponentOptions,
) -> Result<ExponentReport> {
    check_rate(r)?;
    let quantity = "strong_converse_exponent";
    let check = finiteness_check(ch, sigma)?;
    if !check.finite {
        return Ok(ExponentReport::infinite(quantity));
    }
    let pair = ChannelPair::replacer(ch, sigma.sigma());
    let d_search = if opts.certify { opts.search.clone().with_grid(DEFAULT_GRID) } else { opts.search.clone() };
    let d = channel_relative_entropy_with(ch, sigma, &d_search)?;
    if r <= d.value() {
        let mut rep = ExponentReport::new(quantity, DivergenceValue::ZERO).with_alpha(AlphaStar::LimitOne);
        rep.rho_star = d.rho_star;
        rep.gap_certificate = d.gap_certificate;
        rep.dual_value = opts.dual.then_some(DivergenceValue::ZERO);
        return Ok(rep);
    }
    let d_max = channel_max_relative_entropy(ch, &SecondChannel::Replacer(sigma.clone()))?.value();

    let mut warm: ComplexMatrix = g_from_density(d.rho_star.as_ref().expect("finite report has a witness"));
    let mut iterations = 0;
    let sweep = sweep_order(
        r,
        |alpha| {
            let search = StateSearch { starts: 0, grid: None, warm_starts: vec![warm.clone()], ..opts.search.clone() };
            let rep = optimize_pair(&pair, alpha, RenyiFamily::Sandwiched, &search, quantity);
            iterations += rep.iterations;
            if let Some(rho) = &rep.rho_star {
                warm = g_from_density(rho);
            }
            rep.value()
        },
        Some(d_max),
    );

    let mut rep = ExponentReport::new(quantity, DivergenceValue::Finite(sweep.value)).with_alpha(sweep.alpha_star);
    rep.tolerance = 1e-5;
    match sweep.alpha_star {
        AlphaStar::Value(a) => {
            let mut search = opts.search.clone().warm(warm.clone());
            if !opts.certify {
                search.grid = None;
            } else if search.grid.is_none() {
                search.grid = Some(DEFAULT_GRID);
            }
            let cert = optimize_pair(&pair, a, RenyiFamily::Sandwiched, &search, quantity);
            let u = (a - 1.0) / a;
            // the certified supremum can only be larger, which lowers the exponent
            rep.value = DivergenceValue::Finite(sweep.value.min(u * (r - cert.value())));
            rep.rho_star = cert.rho_star;
            rep.gap_certificate = cert.gap_certificate;
            iterations += cert.iterations;
            rep.winning_start = cert.winning_start;
        }
        _ => rep.rho_star = Some(density_from_g(&warm)),
    }
    if opts.dual {
        let mut search = StateSearch { grid: None, ..opts.search.clone() }.with_starts(2);
        if let Some(rho) = &rep.rho_star {
            search.warm_starts.push(g_from_density(rho));
        }
        let f = |g: &ComplexMatrix| {
            let (w1, w2) = pair.outputs(g);
            hoeffding_anti_divergence(&w1, &w2, r).map(|h| h.value.value()).unwrap_or(f64::NAN)
        };
        let dual = optimize_state(ch.dim_in(), Sense::Minimize, f, &search);
        iterations += dual.iterations;
        rep.dual_value = Some(DivergenceValue::Finite(dual.value));
        rep.gap_certificate = rep.gap_certificate.max((dual.value - rep.value()).abs());
    }
    rep.iterations = iterations;
    Ok(rep)
}

/// Exponent bound for feedback-assisted classical communication at rate `R`:
/// `sup_{α>1} ((α−1)/α)(R − Ĩ_α(𝒩))`.
///
/// The success probability of any feedback-assisted code decays at least this
/// fast; whether the bound is achievable is not known, so the value is an
/// upper-bound exponent rather than the optimal one.
pub fn feedback_sc_exponent(ch: &KrausChannel, rate: f64) -> Result<ExponentReport> {
    feedback_sc_exponent_with(ch, rate, &ExponentOptions::default())
}

pub fn feedback_sc_exponent_with(ch: &KrausChannel, rate: f64, opts: &ExponentOptions) -> Result<ExponentReport> {
    check_rate(rate)?;
    let quantity = "feedback_sc_exponent";
    let one_search = if opts.certify { opts.search.clone().with_grid(SINGLE_GRID) } else { opts.search.clone() };
    let info = channel_mutual_information_with(ch, 1.0, RenyiFamily::Sandwiched, &one_search, None)?;
    if rate <= info.value() {
        let mut rep = ExponentReport::new(quantity, DivergenceValue::ZERO).with_alpha(AlphaStar::LimitOne);
        rep.rho_star = info.rho_star;
        rep.sigma_star = info.sigma_star;
        rep.gap_certificate = info.gap_certificate;
        return Ok(rep);
    }
    let mut warm = (
        info.rho_star.clone().expect("witness"),
        info.sigma_star.clone().expect("witness"),
    );
    let mut iterations = info.iterations;
    let light = StateSearch { starts: 0, grid: None, warm_starts: Vec::new(), ..opts.search.clone() };
    let sweep = sweep_order(
        rate,
        |alpha| {
            let rep = channel_mutual_information_with(ch, alpha, RenyiFamily::Sandwiched, &light, Some((&warm.0, &warm.1)))
                .expect("order validated by the sweep");
            iterations += rep.iterations;
            if let (Some(r), Some(s)) = (rep.rho_star.clone(), rep.sigma_star.clone()) {
                warm = (r, s);
            }
            rep.value()
        },
        None,
    );
    let mut rep = ExponentReport::new(quantity, DivergenceValue::Finite(sweep.value)).with_alpha(sweep.alpha_star);
    rep.tolerance = 1e-5;
    rep.rho_star = Some(warm.0.clone());
    rep.sigma_star = Some(warm.1.clone());
    if let (AlphaStar::Value(a), true) = (sweep.alpha_star, opts.certify) {
        let mut search = opts.search.clone();
        if search.grid.is_none() {
            search.grid = Some(NESTED_GRID);
        }
        let cert = channel_mutual_information_with(ch, a, RenyiFamily::Sandwiched, &search, Some((&warm.0, &warm.1)))?;
        let u = (a - 1.0) / a;
        rep.value = DivergenceValue::Finite(sweep.value.min(u * (rate - cert.value())));
        rep.rho_star = cert.rho_star;
        rep.sigma_star = cert.sigma_star;
        rep.gap_certificate = cert.gap_certificate;
        rep.winning_start = cert.winning_start;
        iterations += cert.iterations;
    }
    rep.iterations = iterations;
    Ok(rep)
}

/// Composite Stein exponent `I(𝒩)`, computed as `sup_ρ inf_σ` (value) and as
/// `inf_σ sup_ρ` over replacer channels (`dual_value`).
pub fn composite_stein_exponent(ch: &KrausChannel) -> Result<ExponentReport> {
    composite_stein_exponent_with(ch, &StateSearch::default())
}

pub fn composite_stein_exponent_with(ch: &KrausChannel, search: &StateSearch) -> Result<ExponentReport> {
    let primal = channel_mutual_information_with(ch, 1.0, RenyiFamily::Sandwiched, &search.clone().with_grid(SINGLE_GRID), None)?;
    let warm = (
        primal.rho_star.clone().expect("witness"),
        primal.sigma_star.clone().expect("witness"),
    );
    let dual = replacer_set_divergence_with(
        ch,
        1.0,
        RenyiFamily::Sandwiched,
        &search.clone().with_grid(NESTED_GRID),
        Some((&warm.0, &warm.1)),
    )?;
    let mut rep = primal;
    rep.quantity = "composite_stein_exponent".into();
    rep.gap_certificate = rep.gap_certificate.max(dual.gap_certificate).max((rep.value() - dual.value()).abs());
    rep.dual_value = Some(dual.value);
    rep.iterations += dual.iterations;
    Ok(rep)
}

/// Lower and upper bounds on the composite strong converse exponent.
#[derive(Debug, Clone, Serialize)]
pub struct CompositeBounds {
    pub lower: ExponentReport,
    pub upper: ExponentReport,
}

/// Number of random inputs tried by the upper bound besides `ρ*` and `I/d`.
pub const COMPOSITE_SAMPLES: usize = 3;

/// Bounds on the composite strong converse exponent at rate `r`.
///
/// The lower bound `sup_σ sc_σ(r)` equals `sup_{α>1} ((α−1)/α)(r − Ĩ_α(𝒩))`
/// once the suprema over `σ` and `α` are interchanged and the replacer
/// distance is identified with the Rényi mutual information. The upper bound
/// is the smallest, over sampled inputs `ρ`, of
/// `sup_{α>1} ((α−1)/α)(r − Ĩ_α(R;B)_ω)` with `ω = ρ^{1/2}𝒩(Γ)ρ^{1/2}`.
/// The two are not claimed to coincide.
pub fn composite_sc_bounds(ch: &KrausChannel, r: f64) -> Result<CompositeBounds> {
    composite_sc_bounds_with(ch, r, &ExponentOptions::fast(), 0)
}

pub fn composite_sc_bounds_with(ch: &KrausChannel, r: f64, opts: &ExponentOptions, seed: u64) -> Result<CompositeBounds> {
    let mut lower = feedback_sc_exponent_with(ch, r, opts)?;
    lower.quantity = "composite_sc_lower".into();

    let mut candidates: Vec<DensityOperator> = Vec::new();
    if let Some(rho) = &lower.rho_star {
        candidates.push(rho.clone());
    }
    candidates.push(DensityOperator::maximally_mixed(ch.dim_in()));
    for k in 0..COMPOSITE_SAMPLES as u64 {
        candidates.push(random_state(ch.dim_in(), seed.wrapping_mul(1000).wrapping_add(k)));
    }
    let pair = ChannelPair::replacer(ch, &DensityOperator::maximally_mixed(ch.dim_out()));
    let inner = StateSearch { starts: 1, grid: None, ..StateSearch::default() };
    let mut best: Option<(f64, AlphaStar, DensityOperator, Option<DensityOperator>)> = None;
    let mut iterations = 0;
    for rho in &candidates {
        let w = pair.first_output(&g_from_density(rho));
        let w = DensityOperator::from_raw(w.matrix().clone(), vec![ch.dim_in(), ch.dim_out()]);
        let info = renyi_mutual_information_with(&w, 1.0, RenyiFamily::Sandwiched, &inner)?;
        if r <= info.value() {
            // every term of the supremum is non-positive
            best = Some((0.0, AlphaStar::LimitOne, rho.clone(), info.sigma_star));
            break;
        }
        let mut warm: Option<DensityOperator> = info.sigma_star.clone();
        let sweep = sweep_order(
            r,
            |alpha| {
                let mut search = inner.clone();
                if let Some(s) = &warm {
                    search.warm_starts.push(g_from_density(s));
                }
                let rep = renyi_mutual_information_with(&w, alpha, RenyiFamily::Sandwiched, &search)
                    .expect("valid bipartite state");
                iterations += rep.iterations;
                warm = rep.sigma_star.clone();
                rep.value()
            },
            None,
        );
        if best.as_ref().is_none_or(|b| sweep.value < b.0) {
            best = Some((sweep.value, sweep.alpha_star, rho.clone(), warm.clone()));
        }
    }
    let (value, alpha_star, rho, sigma) = best.expect("at least one candidate");
    let mut upper = ExponentReport::new("composite_sc_upper", DivergenceValue::Finite(value)).with_alpha(alpha_star);
    upper.rho_star = Some(rho);
    upper.sigma_star = sigma;
    upper.iterations = iterations;
    upper.tolerance = 1e-5;
    // the order of the suprema makes lower ≤ upper; report any numerical excess
    upper.gap_certificate = (lower.value() - value).max(0.0);
    Ok(CompositeBounds { lower, upper })
}
