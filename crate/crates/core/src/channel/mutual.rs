use super::divergence::ChannelPair;
use super::report::ExponentReport;
use crate::divergences::renyi::ALPHA_ONE_WINDOW;
use crate::divergences::{relative_entropy, AlphaStar, DivergenceValue, RenyiFamily};
use crate::optimize::{density_from_g, g_from_density, nested_optimize, optimize_state, InnerOptions, Sense, StateSearch};
use crate::qmat::{ComplexMatrix, DensityOperator, KrausChannel};
use crate::{Error, Result};

/// Bloch-grid resolution for nested problems, where every grid point costs an inner solve.
pub const NESTED_GRID: usize = 9;

/// Grid resolution for the single-level `α = 1` problem.
pub const SINGLE_GRID: usize = 40;

fn check_order(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || alpha.is_infinite() {
        return Err(Error::domain(format!("Rényi order must be positive and finite, got {alpha}")));
    }
    Ok(())
}

fn heuristic(alpha: f64, family: RenyiFamily) -> bool {
    match family {
        RenyiFamily::Sandwiched => alpha < 0.5,
        RenyiFamily::Petz => alpha > 2.0,
    }
}

/// Default outer search for channel mutual informations.
pub fn default_search() -> StateSearch {
    StateSearch::default().with_grid(NESTED_GRID)
}

/// `I(R;B)` of `ρ^{1/2}𝒩(Γ)ρ^{1/2}` and its `B` marginal.
pub(crate) fn mutual_information_at(pair: &ChannelPair, g: &ComplexMatrix) -> (f64, ComplexMatrix) {
    let w = pair.first_output(g);
    let w_b = w.partial_trace(&[1]).expect("bipartite output");
    let tau = w.partial_trace(&[0]).expect("bipartite output");
    let v = relative_entropy(&w, &tau.tensor(&w_b)).map(|v| v.value()).unwrap_or(f64::NAN);
    (v, w_b.into_matrix())
}

/// Channel Rényi mutual information `sup_ρ inf_σ D_α(ρ^{1/2}𝒩(Γ)ρ^{1/2} ‖ ρ ⊗ σ)`.
///
/// At `α = 1` the inner infimum is attained at the output marginal and the
/// result is `I(𝒩)`.
pub fn channel_mutual_information(ch: &KrausChannel, alpha: f64, family: RenyiFamily) -> Result<ExponentReport> {
    let search = if (alpha - 1.0).abs() < ALPHA_ONE_WINDOW {
        StateSearch::default().with_grid(SINGLE_GRID)
    } else {
        default_search()
    };
    channel_mutual_information_with(ch, alpha, family, &search, None)
}

/// [`channel_mutual_information`] with an explicit outer search and an
/// optional warm start `(ρ, σ)` for the input and the inner state.
pub fn channel_mutual_information_with(
    ch: &KrausChannel,
    alpha: f64,
    family: RenyiFamily,
    search: &StateSearch,
    warm: Option<(&DensityOperator, &DensityOperator)>,
) -> Result<ExponentReport> {
    check_order(alpha)?;
    let quantity = "channel_mutual_information";
    let mixed = DensityOperator::maximally_mixed(ch.dim_out());
    let pair = ChannelPair::replacer(ch, &mixed);
    let mut search = search.clone();
    if let Some((rho, _)) = warm {
        search.warm_starts.insert(0, g_from_density(rho));
    }
    if (alpha - 1.0).abs() < ALPHA_ONE_WINDOW {
        let opt = optimize_state(ch.dim_in(), Sense::Maximize, |g| mutual_information_at(&pair, g).0, &search);
        let (_, w_b) = mutual_information_at(&pair, &opt.g);
        let mut rep = ExponentReport::new(quantity, DivergenceValue::from_f64(opt.value)).with_alpha(AlphaStar::Value(1.0));
        rep.rho_star = Some(opt.state());
        rep.sigma_star = Some(DensityOperator::from_raw(w_b, vec![ch.dim_out()]));
        rep.gap_certificate = opt.grid_gap;
        rep.iterations = opt.iterations;
        rep.winning_start = opt.winning_start;
        return Ok(rep);
    }
    let inner = InnerOptions { warm: warm.map(|(_, s)| g_from_density(s)), ..InnerOptions::default() };
    let f = |g: &ComplexMatrix, h: &ComplexMatrix| pair.objective_against(g, density_from_g(h).matrix(), alpha, family);
    let opt = nested_optimize(ch.dim_in(), ch.dim_out(), Sense::Maximize, f, &search, &inner);
    let mut rep = ExponentReport::new(quantity, DivergenceValue::from_f64(opt.outer.value)).with_alpha(AlphaStar::Value(alpha));
    rep.rho_star = Some(opt.outer.state());
    rep.sigma_star = Some(density_from_g(&opt.inner_g));
    rep.gap_certificate = opt.outer.grid_gap;
    rep.iterations = opt.outer.iterations;
    rep.winning_start = opt.outer.winning_start;
    rep.flags.heuristic = heuristic(alpha, family);
    Ok(rep)
}

/// Distance of a channel from the set of replacer channels,
/// `inf_σ D_α(𝒩‖ℛ_σ) = inf_σ sup_ρ D_α(ρ^{1/2}𝒩(Γ)ρ^{1/2} ‖ ρ ⊗ σ)`.
///
/// For the sandwiched family with `α ≥ 1/2` this equals the channel Rényi
/// mutual information; it is computed here with the optimizations in the
/// opposite order.
pub fn replacer_set_divergence(ch: &KrausChannel, alpha: f64, family: RenyiFamily) -> Result<ExponentReport> {
    replacer_set_divergence_with(ch, alpha, family, &default_search(), None)
}

pub fn replacer_set_divergence_with(
    ch: &KrausChannel,
    alpha: f64,
    family: RenyiFamily,
    search: &StateSearch,
    warm: Option<(&DensityOperator, &DensityOperator)>,
) -> Result<ExponentReport> {
    check_order(alpha)?;
    let mixed = DensityOperator::maximally_mixed(ch.dim_out());
    let pair = ChannelPair::replacer(ch, &mixed);
    let mut search = search.clone();
    if let Some((_, sigma)) = warm {
        search.warm_starts.insert(0, g_from_density(sigma));
    }
    let inner = InnerOptions { warm: warm.map(|(r, _)| g_from_density(r)), ..InnerOptions::default() };
    let f = |h: &ComplexMatrix, g: &ComplexMatrix| pair.objective_against(g, density_from_g(h).matrix(), alpha, family);
    let opt = nested_optimize(ch.dim_out(), ch.dim_in(), Sense::Minimize, f, &search, &inner);
    let mut rep =
        ExponentReport::new("replacer_set_divergence", DivergenceValue::from_f64(opt.outer.value)).with_alpha(AlphaStar::Value(alpha));
    rep.sigma_star = Some(opt.outer.state());
    rep.rho_star = Some(density_from_g(&opt.inner_g));
    rep.gap_certificate = opt.outer.grid_gap;
    rep.iterations = opt.outer.iterations;
    rep.winning_start = opt.outer.winning_start;
    rep.flags.heuristic = heuristic(alpha, family);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::presets;
    use crate::qmat::random::{random_channel, random_state};
    use crate::qmat::ReplacerSpec;

    fn quick() -> StateSearch {
        StateSearch::default().with_starts(2)
    }

    #[test]
    fn replacer_has_no_information() {
        let ch = ReplacerSpec::new(random_state(2, 4)).unwrap().to_channel(2);
        for a in [1.0, 2.0] {
            let rep = channel_mutual_information_with(&ch, a, RenyiFamily::Sandwiched, &quick(), None).unwrap();
            assert!(rep.value().abs() < 1e-8, "α={a}: {}", rep.value());
        }
    }

    #[test]
    fn identity_channel_information() {
        let id = presets::identity(2);
        let rep = channel_mutual_information(&id, 1.0, RenyiFamily::Sandwiched).unwrap();
        assert!((rep.value() - 2.0).abs() < 1e-8);
        assert!(rep.gap_certificate <= 1e-8);
        let rep = channel_mutual_information_with(&id, 2.0, RenyiFamily::Sandwiched, &quick(), None).unwrap();
        assert!((rep.value() - 2.0).abs() < 1e-6, "{}", rep.value());
    }

    #[test]
    fn dephasing_information_is_one_bit() {
        let rep = channel_mutual_information(&presets::dephasing(2, 1.0).unwrap(), 1.0, RenyiFamily::Sandwiched).unwrap();
        assert!((rep.value() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn amplitude_damping_matches_scan() {
        // I(𝒩) of amplitude damping is attained on diagonal inputs; scan the population
        let gamma = 0.3;
        let ch = presets::amplitude_damping(gamma).unwrap();
        let h = |p: f64| if p <= 0.0 || p >= 1.0 { 0.0 } else { -p * p.log2() - (1.0 - p) * (1.0 - p).log2() };
        let mut best = 0.0f64;
        for k in 0..=20000 {
            let p = k as f64 / 20000.0;
            // output population (1−γ)p, environment γp
            best = best.max(h(p) + h((1.0 - gamma) * p) - h(gamma * p));
        }
        let rep = channel_mutual_information_with(&ch, 1.0, RenyiFamily::Sandwiched, &quick(), None).unwrap();
        assert!((rep.value() - best).abs() < 1e-6, "{} vs {best}", rep.value());
    }

    #[test]
    fn both_orders_agree() {
        let ch = random_channel(2, 2, 2, 11);
        for a in [0.6, 2.0] {
            let primal = channel_mutual_information_with(&ch, a, RenyiFamily::Sandwiched, &quick(), None).unwrap();
            let dual = replacer_set_divergence_with(&ch, a, RenyiFamily::Sandwiched, &quick(), None).unwrap();
            assert!((primal.value() - dual.value()).abs() < 1e-5, "α={a}: {} vs {}", primal.value(), dual.value());
        }
    }

    #[test]
    fn rejects_bad_order() {
        assert!(channel_mutual_information(&presets::identity(2), 0.0, RenyiFamily::Petz).is_err());
    }
}
