use serde::Serialize;

use super::report::ExponentReport;
use crate::divergences::{max_relative_entropy, renyi_auto, AlphaStar, DivergenceValue, RenyiFamily};
use crate::optimize::{density_from_g, optimize_state, Sense, StateSearch};
use crate::qmat::linalg::{self, eigh, ComplexMatrix, ComplexVector};
use crate::qmat::{CpMap, DensityOperator, HermitianOperator, KrausChannel, ReplacerSpec};
use crate::{Error, Result};

/// Bloch-grid resolution per axis for qubit-input certification.
pub const DEFAULT_GRID: usize = 40;

/// Overlap `Tr ω₁ω₂` below which two outputs count as orthogonal.
const ORTHOGONAL_OVERLAP: f64 = 1e-9;
/// Entrywise distance below which two Choi operators count as the same channel.
pub const SELF_COMPARISON_TOL: f64 = 1e-14;

/// The alternative hypothesis of a channel comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum SecondChannel {
    Channel(KrausChannel),
    Replacer(ReplacerSpec),
}

impl SecondChannel {
    fn dims(&self, dim_in: usize) -> (usize, usize) {
        match self {
            SecondChannel::Channel(c) => (c.dim_in(), c.dim_out()),
            SecondChannel::Replacer(r) => (dim_in, r.dim_out()),
        }
    }
}

/// `D_α(𝒩₁‖𝒩₂)` or `D̃_α(𝒩₁‖𝒩₂)` to be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDivergenceQuery {
    pub channel_1: KrausChannel,
    pub channel_2: SecondChannel,
    pub alpha: f64,
    pub family: RenyiFamily,
}

impl ChannelDivergenceQuery {
    pub fn new(channel_1: KrausChannel, channel_2: SecondChannel, alpha: f64, family: RenyiFamily) -> Result<Self> {
        let (din, dout) = channel_2.dims(channel_1.dim_in());
        if din != channel_1.dim_in() || dout != channel_1.dim_out() {
            return Err(Error::domain(format!(
                "channel dimensions differ: {}→{} vs {din}→{dout}",
                channel_1.dim_in(),
                channel_1.dim_out()
            )));
        }
        let lowest = if family == RenyiFamily::Petz { 0.0 } else { f64::MIN_POSITIVE };
        if alpha.is_nan() || alpha < lowest {
            return Err(Error::domain(format!("invalid Rényi order {alpha} for the {family} family")));
        }
        if family == RenyiFamily::Petz && alpha.is_infinite() {
            return Err(Error::domain("the Petz family is not defined at α = ∞"));
        }
        Ok(Self { channel_1, channel_2, alpha, family })
    }

    pub fn replacer(channel: KrausChannel, sigma: ReplacerSpec, alpha: f64, family: RenyiFamily) -> Result<Self> {
        Self::new(channel, SecondChannel::Replacer(sigma), alpha, family)
    }

    /// Orders where the input optimization is known to be quasi-concave.
    pub fn in_well_behaved_range(&self) -> bool {
        match self.family {
            RenyiFamily::Sandwiched => self.alpha >= 0.5,
            RenyiFamily::Petz => self.alpha <= 2.0,
        }
    }
}

#[derive(Debug, Clone)]
enum SecondChoi {
    Choi(ComplexMatrix),
    Replacer(ComplexMatrix),
}

/// Choi data of a channel pair, evaluated on inputs `ρ_{A'} = G G†`
/// through `ω_i = (G†⊗I) 𝒩_i(Γ) (G⊗I)`, which is unitarily equivalent to
/// `ρ^{1/2} 𝒩_i(Γ) ρ^{1/2}`.
#[derive(Debug, Clone)]
pub(crate) struct ChannelPair {
    pub(crate) d_in: usize,
    pub(crate) d_out: usize,
    c1: ComplexMatrix,
    second: SecondChoi,
}

impl ChannelPair {
    pub(crate) fn new(ch: &KrausChannel, second: &SecondChannel) -> Self {
        let second = match second {
            SecondChannel::Channel(c) => SecondChoi::Choi(c.choi().into_matrix()),
            SecondChannel::Replacer(r) => SecondChoi::Replacer(r.sigma().matrix().clone()),
        };
        Self { d_in: ch.dim_in(), d_out: ch.dim_out(), c1: ch.choi().into_matrix(), second }
    }

    pub(crate) fn replacer(ch: &KrausChannel, sigma: &DensityOperator) -> Self {
        Self {
            d_in: ch.dim_in(),
            d_out: ch.dim_out(),
            c1: ch.choi().into_matrix(),
            second: SecondChoi::Replacer(sigma.matrix().clone()),
        }
    }

    fn lift(&self, g: &ComplexMatrix) -> ComplexMatrix {
        linalg::kron(&g.adjoint(), &ComplexMatrix::identity(self.d_out, self.d_out))
    }

    /// First output `ω₁` on `A' ⊗ B`.
    pub(crate) fn first_output(&self, g: &ComplexMatrix) -> HermitianOperator {
        let l = self.lift(g);
        let m = &l * &self.c1 * l.adjoint();
        HermitianOperator::from_raw(linalg::hermitian_part(&m), vec![self.d_in, self.d_out])
    }

    pub(crate) fn outputs(&self, g: &ComplexMatrix) -> (HermitianOperator, HermitianOperator) {
        let w1 = self.first_output(g);
        let w2 = match &self.second {
            SecondChoi::Choi(c2) => {
                let l = self.lift(g);
                linalg::hermitian_part(&(&l * c2 * l.adjoint()))
            }
            SecondChoi::Replacer(sigma) => {
                let tau = linalg::hermitian_part(&(g.adjoint() * g));
                linalg::kron(&tau, sigma)
            }
        };
        (w1, HermitianOperator::from_raw(w2, vec![self.d_in, self.d_out]))
    }

    /// Divergence of the two outputs; `+∞` stays infinite, invalid input gives NaN.
    pub(crate) fn objective(&self, g: &ComplexMatrix, alpha: f64, family: RenyiFamily) -> f64 {
        let (w1, w2) = self.outputs(g);
        let v = if alpha.is_infinite() {
            max_relative_entropy(&w1, &w2)
        } else {
            renyi_auto(&w1, &w2, alpha, family)
        };
        v.map(|v| v.value()).unwrap_or(f64::NAN)
    }

    /// `D_α(ω₁ ‖ τ ⊗ σ)` with `τ = G†G` the input marginal on `A'`.
    pub(crate) fn objective_against(&self, g: &ComplexMatrix, sigma: &ComplexMatrix, alpha: f64, family: RenyiFamily) -> f64 {
        let w1 = self.first_output(g);
        let tau = linalg::hermitian_part(&(g.adjoint() * g));
        let w2 = HermitianOperator::from_raw(linalg::kron(&tau, sigma), vec![self.d_in, self.d_out]);
        renyi_auto(&w1, &w2, alpha, family).map(|v| v.value()).unwrap_or(f64::NAN)
    }

    fn overlap(&self, g: &ComplexMatrix) -> f64 {
        let (w1, w2) = self.outputs(g);
        linalg::trace_of_product(w1.matrix(), w2.matrix()).re
    }

    fn second_choi(&self) -> ComplexMatrix {
        match &self.second {
            SecondChoi::Choi(c) => c.clone(),
            SecondChoi::Replacer(s) => linalg::kron(&ComplexMatrix::identity(self.d_in, self.d_in), s),
        }
    }

    /// Both Choi operators agree to [`SELF_COMPARISON_TOL`].
    pub(crate) fn is_self_comparison(&self) -> bool {
        linalg::max_abs_diff(&self.c1, &self.second_choi()) <= SELF_COMPARISON_TOL
    }

    pub(crate) fn maximally_mixed_g(&self) -> ComplexMatrix {
        ComplexMatrix::identity(self.d_in, self.d_in).unscale((self.d_in as f64).sqrt())
    }
}

/// Outcome of [`finiteness_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinitenessCheck {
    pub finite: bool,
    /// Output vector outside `supp σ` reached by the channel, when not finite.
    #[serde(skip)]
    pub witness: Option<ComplexVector>,
}

/// Whether `supp 𝒩(ρ) ⊆ supp σ` for every input, decided on `𝒩(I/d)`,
/// whose support contains that of every other output.
pub fn finiteness_check(ch: &KrausChannel, sigma: &ReplacerSpec) -> Result<FinitenessCheck> {
    if ch.dim_out() != sigma.dim_out() {
        return Err(Error::domain("replacer output dimension does not match the channel"));
    }
    let mixed = DensityOperator::maximally_mixed(ch.dim_in());
    let out = ch.apply(&mixed, 0)?;
    let es = sigma.sigma().eigh();
    let kernel = es.kernel_projector();
    let leak = eigh(&linalg::hermitian_part(&(&kernel * out.matrix() * &kernel)));
    let k = leak.values.len() - 1;
    if leak.values[k] > crate::divergences::renyi::SUPPORT_LEAK_TOL {
        let v = leak.vectors.column(k).into_owned();
        return Ok(FinitenessCheck { finite: false, witness: Some(v) });
    }
    Ok(FinitenessCheck { finite: true, witness: None })
}

/// `D_max(𝒩₁‖𝒩₂) = D_max(𝒩₁(Γ)‖𝒩₂(Γ))`: conjugating both Choi operators by
/// a full-rank `ρ^{1/2}⊗I` preserves the operator inequality, and
/// rank-deficient inputs only compress it.
pub fn channel_max_relative_entropy(ch: &KrausChannel, second: &SecondChannel) -> Result<DivergenceValue> {
    let q = ChannelDivergenceQuery::new(ch.clone(), second.clone(), f64::INFINITY, RenyiFamily::Sandwiched)?;
    let pair = ChannelPair::new(&q.channel_1, &q.channel_2);
    if pair.is_self_comparison() {
        return Ok(DivergenceValue::ZERO);
    }
    let c1 = HermitianOperator::from_raw(pair.c1.clone(), vec![pair.d_in, pair.d_out]);
    let c2 = HermitianOperator::from_raw(pair.second_choi(), vec![pair.d_in, pair.d_out]);
    max_relative_entropy(&c1, &c2)
}

/// Channel Rényi divergence with the default search (8 starts, Bloch grid for qubit inputs).
pub fn channel_renyi_divergence(q: &ChannelDivergenceQuery) -> Result<ExponentReport> {
    channel_renyi_divergence_with(q, &StateSearch::default().with_grid(DEFAULT_GRID))
}

/// `sup_ρ D_α(ρ^{1/2}𝒩₁(Γ)ρ^{1/2} ‖ ρ^{1/2}𝒩₂(Γ)ρ^{1/2})` over input states `ρ_{A'}`.
pub fn channel_renyi_divergence_with(q: &ChannelDivergenceQuery, search: &StateSearch) -> Result<ExponentReport> {
    let pair = ChannelPair::new(&q.channel_1, &q.channel_2);
    let mut rep = optimize_pair(&pair, q.alpha, q.family, search, "channel_renyi_divergence");
    rep.flags.heuristic = !q.in_well_behaved_range();
    Ok(rep)
}

pub(crate) fn optimize_pair(
    pair: &ChannelPair,
    alpha: f64,
    family: RenyiFamily,
    search: &StateSearch,
    quantity: &str,
) -> ExponentReport {
    let alpha_star = AlphaStar::Value(alpha);
    let mixed = pair.maximally_mixed_g();
    if pair.is_self_comparison() {
        // equal Choi operators give equal outputs for every input
        let a = if alpha.is_infinite() { AlphaStar::Infinity } else { alpha_star };
        let mut rep = ExponentReport::new(quantity, DivergenceValue::ZERO).with_alpha(a);
        rep.rho_star = Some(density_from_g(&mixed));
        rep.tolerance = 0.0;
        return rep;
    }
    if alpha.is_infinite() {
        let v = DivergenceValue::from_f64(pair.objective(&mixed, alpha, family));
        let mut rep = ExponentReport::new(quantity, v).with_alpha(AlphaStar::Infinity);
        rep.rho_star = Some(density_from_g(&mixed));
        rep.flags.infinite = !v.is_finite();
        rep.tolerance = 1e-12;
        return rep;
    }
    // a full-rank input has the largest output supports; for α ≥ 1 it decides finiteness
    if !pair.objective(&mixed, alpha, family).is_finite() {
        let mut rep = ExponentReport::infinite(quantity).with_alpha(alpha_star);
        rep.rho_star = Some(density_from_g(&mixed));
        return rep;
    }
    if alpha < 1.0 {
        // below one the value is infinite once some input makes the outputs orthogonal
        let probe = StateSearch { starts: 3, grid: None, warm_starts: Vec::new(), ..search.clone() };
        // the square root keeps the minimum non-degenerate at orthogonal inputs
        let opt = optimize_state(pair.d_in, Sense::Minimize, |g| pair.overlap(g).max(0.0).sqrt(), &probe);
        if opt.value * opt.value <= ORTHOGONAL_OVERLAP {
            let mut rep = ExponentReport::infinite(quantity).with_alpha(alpha_star);
            rep.rho_star = Some(opt.state());
            return rep;
        }
    }
    let opt = optimize_state(pair.d_in, Sense::Maximize, |g| pair.objective(g, alpha, family), search);
    let mut rep = ExponentReport::new(quantity, DivergenceValue::from_f64(opt.value)).with_alpha(alpha_star);
    rep.rho_star = Some(opt.state());
    rep.gap_certificate = opt.grid_gap;
    rep.iterations = opt.iterations;
    rep.winning_start = opt.winning_start;
    rep.flags.infinite = !rep.value.is_finite();
    rep
}

/// Channel relative entropy `D(𝒩‖ℛ_σ)`, the adaptive Stein exponent.
pub fn channel_relative_entropy(ch: &KrausChannel, sigma: &ReplacerSpec) -> Result<ExponentReport> {
    channel_relative_entropy_with(ch, sigma, &StateSearch::default().with_grid(DEFAULT_GRID))
}

pub fn channel_relative_entropy_with(ch: &KrausChannel, sigma: &ReplacerSpec, search: &StateSearch) -> Result<ExponentReport> {
    let q = ChannelDivergenceQuery::replacer(ch.clone(), sigma.clone(), 1.0, RenyiFamily::Sandwiched)?;
    let pair = ChannelPair::new(&q.channel_1, &q.channel_2);
    Ok(optimize_pair(&pair, 1.0, RenyiFamily::Sandwiched, search, "channel_relative_entropy"))
}

/// `Θ_{σ^{(1−α)/α}} ∘ 𝒩`, i.e. `𝒩` followed by conjugation with `σ^{(1−α)/2α}`.
pub fn theta_map(ch: &KrausChannel, sigma: &ReplacerSpec, alpha: f64) -> Result<CpMap> {
    let s = sigma.sigma().support_power((1.0 - alpha) / (2.0 * alpha))?;
    ch.as_cp().then_conjugate(s.matrix())
}

/// Log of the ratio `‖(G⊗I) Φ(Γ) (G†⊗I)‖_α / ‖G†G‖_α`.
fn log2_cb_ratio(choi: &ComplexMatrix, d_out: usize, g: &ComplexMatrix, alpha: f64) -> f64 {
    let l = linalg::kron(g, &ComplexMatrix::identity(d_out, d_out));
    let num = linalg::hermitian_part(&(&l * choi * l.adjoint()));
    let den = linalg::hermitian_part(&(g.adjoint() * g));
    let sv = |m: &ComplexMatrix| -> Vec<f64> {
        let e = eigh(m);
        let cut = e.cutoff();
        e.values.iter().map(|&v| if v > cut { v } else { 0.0 }).collect()
    };
    linalg::log2_schatten_from_singular(&sv(&num), alpha) - linalg::log2_schatten_from_singular(&sv(&den), alpha)
}

/// `log₂ ‖Φ‖_{CB,1→α}` with the default search.
pub fn log2_cb_one_to_alpha_norm(map: &CpMap, alpha: f64) -> Result<f64> {
    log2_cb_one_to_alpha_norm_with(map, alpha, &StateSearch::default().with_grid(DEFAULT_GRID))
}

/// `log₂ sup_Z ‖(Z⊗I) Φ(Γ) (Z†⊗I)‖_α / ‖Z†Z‖_α`, the completely bounded
/// `1→α` norm over pure inputs on a copy of the input space.
pub fn log2_cb_one_to_alpha_norm_with(map: &CpMap, alpha: f64, search: &StateSearch) -> Result<f64> {
    if !(alpha >= 1.0) {
        return Err(Error::domain(format!("CB norm needs α ≥ 1, got {alpha}")));
    }
    let choi = map.choi().into_matrix();
    let d_out = map.dim_out();
    let f = |g: &ComplexMatrix| log2_cb_ratio(&choi, d_out, g, alpha);
    Ok(optimize_state(map.dim_in(), Sense::Maximize, f, search).value)
}

/// `‖Φ‖_{CB,1→α}` for `α ≥ 1`.
pub fn cb_one_to_alpha_norm(map: &CpMap, alpha: f64) -> Result<f64> {
    log2_cb_one_to_alpha_norm(map, alpha).map(f64::exp2)
}

/// `D̃_α(𝒩‖ℛ_σ) = (α/(α−1)) log ‖Θ_{σ^{(1−α)/α}} ∘ 𝒩‖_{CB,1→α}` for `α > 1`.
pub fn replacer_divergence_via_cb(ch: &KrausChannel, sigma: &ReplacerSpec, alpha: f64) -> Result<DivergenceValue> {
    replacer_divergence_via_cb_with(ch, sigma, alpha, &StateSearch::default().with_grid(DEFAULT_GRID))
}

pub fn replacer_divergence_via_cb_with(
    ch: &KrausChannel,
    sigma: &ReplacerSpec,
    alpha: f64,
    search: &StateSearch,
) -> Result<DivergenceValue> {
    if !(alpha > 1.0) || alpha.is_infinite() {
        return Err(Error::domain(format!("the CB-norm identity needs 1 < α < ∞, got {alpha}")));
    }
    if !finiteness_check(ch, sigma)?.finite {
        return Ok(DivergenceValue::Infinite);
    }
    let map = theta_map(ch, sigma, alpha)?;
    let log_norm = log2_cb_one_to_alpha_norm_with(&map, alpha, search)?;
    Ok(DivergenceValue::Finite(alpha / (alpha - 1.0) * log_norm))
}
