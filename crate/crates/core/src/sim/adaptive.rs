//! n-round adaptive channel-discrimination strategies.
//!
//! Round `i` feeds `A_i` through the unknown channel while the register `R_i`
//! is kept aside; the adaptive channel `𝒜^{(i)}: R_iB_i → R_{i+1}A_{i+1}`
//! prepares the next input. After round `n` a binary test `{Q, I − Q}` on
//! `R_nB_n` decides between the channel and the replacer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::BoundCheck;
use crate::channel::{channel_renyi_divergence, finiteness_check, ChannelDivergenceQuery, ExponentReport};
use crate::divergences::{hypothesis_testing, sandwiched_renyi, BinaryTest, RenyiFamily};
use crate::qmat::json::{ChannelJson, StateJson};
use crate::qmat::linalg::{psd_power, ComplexMatrix};
use crate::qmat::random::{random_channel_with, random_state_with, random_test_operator_with, rng_from_seed};
use crate::qmat::{DensityOperator, HermitianOperator, KrausChannel, PureState, ReplacerSpec};
use crate::{Error, Result};

/// Largest Hilbert-space dimension allowed for `R_iA_i` or `R_iB_i`.
pub const MAX_ROUND_DIM: usize = 64;

pub const MAX_ROUNDS: usize = 5;

/// Trace-norm slack for `τ_{R_iB_i} = τ_{R_i} ⊗ σ`.
pub const FACTORIZATION_TOL: f64 = 1e-9;

/// Slack for the Rényi and Nagaoka-form bounds.
pub const BOUND_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveStrategy {
    initial_state: DensityOperator,
    adaptive_channels: Vec<KrausChannel>,
    final_test: BinaryTest,
    register_dims: Vec<usize>,
    dim_a: usize,
    dim_b: usize,
}

impl AdaptiveStrategy {
    /// `initial_state` lives on `R₁A₁` (dims `[d_{R₁}, d_A]`), the `i`-th
    /// adaptive channel maps `R_iB_i → R_{i+1}A_{i+1}` and `final_test` acts
    /// on `R_nB_n`. Register sizes are read off the channel dimensions.
    pub fn new(
        initial_state: DensityOperator,
        adaptive_channels: Vec<KrausChannel>,
        final_test: BinaryTest,
        dim_b: usize,
    ) -> Result<Self> {
        let dims = initial_state.dims().to_vec();
        if dims.len() != 2 {
            return Err(Error::domain(format!("initial state must be bipartite R₁A₁, got dims {dims:?}")));
        }
        let (d_r1, dim_a) = (dims[0], dims[1]);
        if dim_b == 0 {
            return Err(Error::domain("output dimension must be positive"));
        }
        let mut register_dims = vec![d_r1];
        for (i, a) in adaptive_channels.iter().enumerate() {
            let d_r = *register_dims.last().unwrap();
            if a.dim_in() != d_r * dim_b {
                return Err(Error::domain(format!(
                    "adaptive channel {} expects input dimension {}, but R_{}B_{} has {}",
                    i + 1,
                    a.dim_in(),
                    i + 1,
                    i + 1,
                    d_r * dim_b
                )));
            }
            if a.dim_out() % dim_a != 0 {
                return Err(Error::domain(format!(
                    "adaptive channel {} output dimension {} is not a multiple of d_A = {dim_a}",
                    i + 1,
                    a.dim_out()
                )));
            }
            register_dims.push(a.dim_out() / dim_a);
        }
        let d_rn = *register_dims.last().unwrap();
        if final_test.operator().dim() != d_rn * dim_b {
            return Err(Error::domain(format!(
                "final test has dimension {}, R_nB_n has {}",
                final_test.operator().dim(),
                d_rn * dim_b
            )));
        }
        if register_dims.len() > MAX_ROUNDS {
            return Err(Error::domain(format!("at most {MAX_ROUNDS} rounds are supported")));
        }
        if let Some(&d) = register_dims.iter().find(|&&d| d * dim_a.max(dim_b) > MAX_ROUND_DIM) {
            return Err(Error::domain(format!(
                "register of dimension {d} exceeds the per-round cap of {MAX_ROUND_DIM}"
            )));
        }
        let final_test = BinaryTest::new(final_test.operator().with_dims(vec![d_rn, dim_b])?)?;
        Ok(Self { initial_state, adaptive_channels, final_test, register_dims, dim_a, dim_b })
    }

    pub fn n_rounds(&self) -> usize {
        self.register_dims.len()
    }

    pub fn initial_state(&self) -> &DensityOperator {
        &self.initial_state
    }

    pub fn adaptive_channels(&self) -> &[KrausChannel] {
        &self.adaptive_channels
    }

    pub fn final_test(&self) -> &BinaryTest {
        &self.final_test
    }

    pub fn register_dims(&self) -> &[usize] {
        &self.register_dims
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// Human-readable dimensions per round, e.g. `"R1A1=2x2 -> R1B1=2x2"`.
    pub fn dims_label(&self) -> Vec<String> {
        self.register_dims
            .iter()
            .enumerate()
            .map(|(i, d)| format!("R{k}A{k}={d}x{a} -> R{k}B{k}={d}x{b}", k = i + 1, a = self.dim_a, b = self.dim_b))
            .collect()
    }

    pub fn with_final_test(mut self, test: BinaryTest) -> Result<Self> {
        let d_rn = *self.register_dims.last().unwrap();
        if test.operator().dim() != d_rn * self.dim_b {
            return Err(Error::domain("final test dimension does not match R_nB_n"));
        }
        self.final_test = BinaryTest::new(test.operator().with_dims(vec![d_rn, self.dim_b])?)?;
        Ok(self)
    }
}

/// Both branches after the last channel use, with the test's error probabilities.
#[derive(Debug, Clone)]
pub struct StrategyOutcome {
    /// `ρ_{R_nB_n}` under the channel hypothesis.
    pub rho_out: DensityOperator,
    /// `τ_{R_nB_n}` under the replacer hypothesis.
    pub tau_out: DensityOperator,
    /// `α_n = Tr (I − Q) ρ_out`.
    pub type1: f64,
    /// `β_n = Tr Q τ_out`.
    pub type2: f64,
    /// Largest `‖τ_{R_iB_i} − τ_{R_i} ⊗ σ‖₁` seen over the rounds.
    pub factorization_defect: f64,
}

fn check_channel(s: &AdaptiveStrategy, ch: &KrausChannel, replacer: &ReplacerSpec) -> Result<()> {
    if ch.dim_in() != s.dim_a || ch.dim_out() != s.dim_b {
        return Err(Error::domain(format!(
            "channel maps {} → {}, strategy expects {} → {}",
            ch.dim_in(),
            ch.dim_out(),
            s.dim_a,
            s.dim_b
        )));
    }
    if replacer.dim_out() != s.dim_b {
        return Err(Error::domain("replacer output dimension does not match the strategy"));
    }
    Ok(())
}

fn as_state(h: HermitianOperator) -> DensityOperator {
    let dims = h.dims().to_vec();
    DensityOperator::from_raw(h.into_matrix(), dims)
}

/// Evolves both hypotheses through the strategy.
pub fn run_adaptive(s: &AdaptiveStrategy, ch: &KrausChannel, replacer: &ReplacerSpec) -> Result<StrategyOutcome> {
    check_channel(s, ch, replacer)?;
    let rep_ch = replacer.to_channel(s.dim_a);
    let sigma = replacer.sigma().operator();
    let mut rho = s.initial_state.operator().clone();
    let mut tau = rho.clone();
    let mut defect = 0.0f64;
    for i in 0..s.n_rounds() {
        rho = ch.apply(&rho, 1)?;
        tau = rep_ch.apply(&tau, 1)?;
        let tau_r = tau.partial_trace(&[0])?;
        let d = tau.sub(&tau_r.tensor(sigma))?.trace_norm();
        if d > FACTORIZATION_TOL {
            return Err(Error::domain(format!("replacer branch fails to factorize in round {} (defect {d:.3e})", i + 1)));
        }
        defect = defect.max(d);
        if let Some(a) = s.adaptive_channels.get(i) {
            let next = vec![s.register_dims[i + 1], s.dim_a];
            rho = a.apply(&rho.with_dims(vec![rho.dim()])?, 0)?.with_dims(next.clone())?;
            tau = a.apply(&tau.with_dims(vec![tau.dim()])?, 0)?.with_dims(next)?;
        }
    }
    let clamp = |p: f64| p.clamp(0.0, 1.0);
    Ok(StrategyOutcome {
        type1: clamp(s.final_test.type1(&rho)),
        type2: clamp(s.final_test.type2(&tau)),
        rho_out: as_state(rho),
        tau_out: as_state(tau),
        factorization_defect: defect,
    })
}

/// Replaces the final test by the Neyman–Pearson test at level `epsilon`
/// between the two evolved states.
pub fn optimal_final_test(
    s: &AdaptiveStrategy,
    ch: &KrausChannel,
    replacer: &ReplacerSpec,
    epsilon: f64,
) -> Result<AdaptiveStrategy> {
    let out = run_adaptive(s, ch, replacer)?;
    let np = hypothesis_testing(out.rho_out.operator(), out.tau_out.operator(), epsilon)?;
    s.clone().with_final_test(np.test)
}

/// `D̃_α(𝒩‖ℛ_σ)` as used by the bound checks.
pub fn channel_sandwiched_divergence(ch: &KrausChannel, replacer: &ReplacerSpec, alpha: f64) -> Result<ExponentReport> {
    if !finiteness_check(ch, replacer)?.finite {
        return Err(Error::domain("support condition fails: the channel divergence is infinite"));
    }
    let q = ChannelDivergenceQuery::replacer(ch.clone(), replacer.clone(), alpha, RenyiFamily::Sandwiched)?;
    channel_renyi_divergence(&q)
}

fn check_order(alpha: f64) -> Result<()> {
    if !(alpha > 1.0) || alpha.is_infinite() {
        return Err(Error::domain(format!("the bound needs a finite order α > 1, got {alpha}")));
    }
    Ok(())
}

/// `D̃_α(ρ_{R_nB_n}‖τ_{R_nB_n}) ≤ n D̃_α(𝒩‖ℛ_σ)` on the pre-measurement states.
pub fn renyi_cb_bound_check(
    s: &AdaptiveStrategy,
    ch: &KrausChannel,
    replacer: &ReplacerSpec,
    alpha: f64,
) -> Result<BoundCheck> {
    check_order(alpha)?;
    let d = channel_sandwiched_divergence(ch, replacer, alpha)?.value();
    renyi_cb_bound_check_with(s, ch, replacer, alpha, d)
}

/// [`renyi_cb_bound_check`] with a precomputed channel divergence.
pub fn renyi_cb_bound_check_with(
    s: &AdaptiveStrategy,
    ch: &KrausChannel,
    replacer: &ReplacerSpec,
    alpha: f64,
    channel_divergence: f64,
) -> Result<BoundCheck> {
    check_order(alpha)?;
    let out = run_adaptive(s, ch, replacer)?;
    let lhs = sandwiched_renyi(out.rho_out.operator(), out.tau_out.operator(), alpha)?.value();
    let rhs = s.n_rounds() as f64 * channel_divergence;
    Ok(BoundCheck::new(lhs, rhs, BOUND_TOL))
}

/// `(1/n) log(1 − α_n) ≤ ((α−1)/α)(D̃_α(𝒩‖ℛ_σ) − r)` with `r = −(1/n) log β_n`
/// the rate the strategy actually achieves.
pub fn nagaoka_bound_check_with(
    s: &AdaptiveStrategy,
    ch: &KrausChannel,
    replacer: &ReplacerSpec,
    alpha: f64,
    channel_divergence: f64,
) -> Result<BoundCheck> {
    check_order(alpha)?;
    let out = run_adaptive(s, ch, replacer)?;
    let n = s.n_rounds() as f64;
    let r = -out.type2.log2() / n;
    let lhs = (1.0 - out.type1).log2() / n;
    let rhs = (alpha - 1.0) / alpha * (channel_divergence - r);
    Ok(BoundCheck::new(lhs, rhs, BOUND_TOL))
}

/// `|ψ⟩_{RA} = (I ⊗ ρ^{1/2})|Γ⟩`, a purification of `ρ` with `R ≅ A`.
pub fn canonical_purification(rho: &DensityOperator) -> Result<PureState> {
    let x = psd_power(rho.matrix(), 0.5)?.transpose();
    PureState::from_coefficients(&x)
}

/// Appends a fixed state as a new last tensor factor: `X ↦ X ⊗ ψ`.
fn append_state(d_in: usize, psi: &PureState) -> Result<KrausChannel> {
    let v = psi.amplitudes();
    let d_psi = v.len();
    let col = ComplexMatrix::from_column_slice(d_psi, 1, v.as_slice());
    let k = ComplexMatrix::identity(d_in, d_in).kronecker(&col);
    KrausChannel::new(d_in, d_in * d_psi, vec![k])
}

/// Non-adaptive strategy feeding a fresh copy of `ψ_{R'A}` in every round and
/// keeping all previous outputs in the register. The final test accepts
/// everything until replaced, e.g. by [`optimal_final_test`].
pub fn tensor_strategy(psi: &PureState, n: usize, dim_b: usize) -> Result<AdaptiveStrategy> {
    if psi.dims().len() != 2 {
        return Err(Error::domain("tensor strategy needs a bipartite probe state on R'A"));
    }
    if n == 0 {
        return Err(Error::domain("at least one round is required"));
    }
    let d_ref = psi.dims()[0];
    let mut channels = Vec::with_capacity(n - 1);
    let mut d_r = d_ref;
    for _ in 1..n {
        channels.push(append_state(d_r * dim_b, psi)?);
        d_r = d_r * dim_b * d_ref;
    }
    let accept = BinaryTest::new(HermitianOperator::identity(vec![d_r, dim_b]))?;
    AdaptiveStrategy::new(psi.to_density(), channels, accept, dim_b)
}

/// Tensor strategy built on a purification of the optimal input of `D̃_α(𝒩‖ℛ_σ)`.
pub fn optimal_tensor_strategy(
    ch: &KrausChannel,
    replacer: &ReplacerSpec,
    alpha: f64,
    n: usize,
) -> Result<(AdaptiveStrategy, ExponentReport)> {
    let rep = channel_sandwiched_divergence(ch, replacer, alpha)?;
    let rho = rep.rho_star.clone().ok_or_else(|| Error::domain("channel divergence returned no input witness"))?;
    // the witness lives on the reference A', so the probe is (ρ^{1/2} ⊗ I)|Γ⟩
    let probe = PureState::from_coefficients(&psd_power(rho.matrix(), 0.5)?)?;
    let s = tensor_strategy(&probe, n, ch.dim_out())?;
    Ok((s, rep))
}

/// Register sizes drawn for random strategies.
pub const RANDOM_REGISTER_DIMS: [usize; 3] = [1, 2, 4];

/// Seeded random `n`-round strategy: Ginibre initial state, isometry-dilated
/// adaptive channels, registers drawn from [`RANDOM_REGISTER_DIMS`] and a
/// random final test.
pub fn random_strategy(n: usize, dim_a: usize, dim_b: usize, seed: u64) -> Result<AdaptiveStrategy> {
    let mut rng = rng_from_seed(seed);
    random_strategy_with(n, dim_a, dim_b, &mut rng)
}

pub fn random_strategy_with<R: Rng + ?Sized>(n: usize, dim_a: usize, dim_b: usize, rng: &mut R) -> Result<AdaptiveStrategy> {
    if n == 0 || n > MAX_ROUNDS {
        return Err(Error::domain(format!("number of rounds must lie in 1..={MAX_ROUNDS}")));
    }
    let allowed: Vec<usize> =
        RANDOM_REGISTER_DIMS.iter().copied().filter(|d| d * dim_a.max(dim_b) <= MAX_ROUND_DIM).collect();
    if allowed.is_empty() {
        return Err(Error::domain("channel dimensions exceed the per-round cap"));
    }
    let dims: Vec<usize> = (0..n).map(|_| allowed[rng.random_range(0..allowed.len())]).collect();
    let initial = random_state_with(dims[0] * dim_a, rng).with_dims(vec![dims[0], dim_a])?;
    let mut channels = Vec::with_capacity(n - 1);
    for i in 1..n {
        let (d_in, d_out) = (dims[i - 1] * dim_b, dims[i] * dim_a);
        let kraus = d_in.div_ceil(d_out).max(2);
        channels.push(random_channel_with(d_in, d_out, kraus, rng));
    }
    let d_last = dims[n - 1] * dim_b;
    let q = HermitianOperator::from_raw(random_test_operator_with(d_last, rng), vec![d_last]);
    AdaptiveStrategy::new(initial, channels, BinaryTest::new(q)?, dim_b)
}

/// JSON form: `{"dim_b": b, "initial_state": state, "adaptive_channels": [channel, ...], "final_test": operator}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyJson {
    pub dim_b: usize,
    pub initial_state: StateJson,
    pub adaptive_channels: Vec<ChannelJson>,
    pub final_test: StateJson,
}

impl From<&AdaptiveStrategy> for StrategyJson {
    fn from(s: &AdaptiveStrategy) -> Self {
        Self {
            dim_b: s.dim_b,
            initial_state: StateJson::from(s.initial_state.operator()),
            adaptive_channels: s.adaptive_channels.iter().map(ChannelJson::from).collect(),
            final_test: StateJson::from(s.final_test.operator()),
        }
    }
}

impl TryFrom<&StrategyJson> for AdaptiveStrategy {
    type Error = Error;
    fn try_from(j: &StrategyJson) -> Result<Self> {
        let initial = DensityOperator::try_from(&j.initial_state)?;
        let channels = j.adaptive_channels.iter().map(KrausChannel::try_from).collect::<Result<Vec<_>>>()?;
        let test = BinaryTest::new(HermitianOperator::try_from(&j.final_test)?)?;
        AdaptiveStrategy::new(initial, channels, test, j.dim_b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::presets;

    fn mixed(d: usize) -> ReplacerSpec {
        ReplacerSpec::maximally_mixed(d)
    }

    #[test]
    fn single_round_reduces_to_state_discrimination() {
        let id = presets::identity(2);
        let phi = PureState::maximally_entangled(2);
        let s = tensor_strategy(&phi, 1, 2).unwrap();
        let s = optimal_final_test(&s, &id, &mixed(2), 0.5).unwrap();
        let out = run_adaptive(&s, &id, &mixed(2)).unwrap();
        let tau = DensityOperator::maximally_mixed(4).with_dims(vec![2, 2]).unwrap();
        let direct = hypothesis_testing(phi.to_density().operator(), tau.operator(), 0.5).unwrap();
        assert!((out.type2 - direct.achieved_type2).abs() < 1e-10);
        // Φ against I/4 at ε = 1/2: Q = Φ/2, so β = 1/8
        assert!((out.type2 - 0.125).abs() < 1e-10, "{}", out.type2);
        assert!((out.type1 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn identical_branches_for_replacer_channel() {
        let spec = ReplacerSpec::new(crate::qmat::random_state(2, 8)).unwrap();
        let ch = spec.to_channel(2);
        for seed in 0..5 {
            let s = random_strategy(2, 2, 2, seed).unwrap();
            let out = run_adaptive(&s, &ch, &spec).unwrap();
            assert!((out.type1 + out.type2 - 1.0).abs() < 1e-10);
            assert!(out.rho_out.operator().sub(out.tau_out.operator()).unwrap().trace_norm() < 1e-10);
        }
    }

    #[test]
    fn two_round_matches_direct_evaluation() {
        let ch = presets::dephasing(2, 1.0).unwrap();
        let spec = mixed(2);
        let s = random_strategy(2, 2, 2, 3).unwrap();
        let out = run_adaptive(&s, &ch, &spec).unwrap();
        assert!(out.factorization_defect <= FACTORIZATION_TOL);
        assert!((0.0..=1.0).contains(&out.type1) && (0.0..=1.0).contains(&out.type2));

        // direct matrix evaluation with full embeddings
        let (d_r1, d_r2) = (s.register_dims()[0], s.register_dims()[1]);
        let evolve = |kraus: &[ComplexMatrix], x: &ComplexMatrix, left: usize| -> ComplexMatrix {
            kraus.iter().fold(ComplexMatrix::zeros(x.nrows(), x.ncols()), |acc, k| {
                let full = ComplexMatrix::identity(left, left).kronecker(k);
                acc + &full * x * full.adjoint()
            })
        };
        let a = &s.adaptive_channels()[0];
        let step = |x: &ComplexMatrix, kraus: &[ComplexMatrix]| {
            let y = evolve(kraus, x, d_r1);
            let z = a.kraus().iter().fold(ComplexMatrix::zeros(d_r2 * 2, d_r2 * 2), |acc, k| acc + k * &y * k.adjoint());
            evolve(kraus, &z, d_r2)
        };
        let rho = step(s.initial_state().matrix(), ch.kraus());
        let tau = step(s.initial_state().matrix(), spec.to_channel(2).kraus());
        let q = s.final_test().operator().matrix();
        let beta = crate::qmat::linalg::trace_of_product(q, &tau).re;
        let alpha = 1.0 - crate::qmat::linalg::trace_of_product(q, &rho).re;
        assert!((out.type2 - beta).abs() < 1e-12);
        assert!((out.type1 - alpha).abs() < 1e-12);
    }

    #[test]
    fn tensor_strategy_bound_is_saturated() {
        let id = presets::identity(2);
        let spec = mixed(2);
        for n in 1..=2 {
            let (s, rep) = optimal_tensor_strategy(&id, &spec, 2.0, n).unwrap();
            let c = renyi_cb_bound_check_with(&s, &id, &spec, 2.0, rep.value()).unwrap();
            assert!((c.lhs - 2.0 * n as f64).abs() < 1e-6, "n={n}: {}", c.lhs);
            assert!((c.rhs - 2.0 * n as f64).abs() < 1e-6);
            assert!(c.ok);
        }
    }

    #[test]
    fn tensor_strategy_saturates_on_random_channels() {
        let mut rng = crate::qmat::random::rng_from_seed(5);
        for _ in 0..3 {
            let ch = crate::qmat::random::random_channel_with(2, 2, 2, &mut rng);
            let sigma = crate::qmat::random::random_state_with(2, &mut rng);
            let m = sigma.matrix().scale(0.5) + ComplexMatrix::identity(2, 2).scale(0.25);
            let spec = ReplacerSpec::new(DensityOperator::from_raw(m, vec![2])).unwrap();
            let (s, rep) = optimal_tensor_strategy(&ch, &spec, 2.0, 1).unwrap();
            let c = renyi_cb_bound_check_with(&s, &ch, &spec, 2.0, rep.value()).unwrap();
            assert!((c.lhs - c.rhs).abs() < 1e-6, "{} vs {}", c.lhs, c.rhs);
        }
    }

    #[test]
    fn replacer_bound_is_trivial() {
        let spec = ReplacerSpec::new(crate::qmat::random_state(2, 2)).unwrap();
        let ch = spec.to_channel(2);
        let s = random_strategy(3, 2, 2, 9).unwrap();
        let c = renyi_cb_bound_check_with(&s, &ch, &spec, 2.0, 0.0).unwrap();
        assert!(c.lhs.abs() < 1e-9 && c.ok);
    }

    #[test]
    fn chaining_mismatch_is_rejected() {
        let init = DensityOperator::maximally_mixed(4).with_dims(vec![2, 2]).unwrap();
        let bad = crate::qmat::random_channel(3, 4, 2, 1);
        let test = BinaryTest::new(HermitianOperator::identity(vec![4])).unwrap();
        assert!(AdaptiveStrategy::new(init.clone(), vec![bad], test.clone(), 2).is_err());
        let s = AdaptiveStrategy::new(init, vec![], test, 2).unwrap();
        assert!(run_adaptive(&s, &presets::identity(3), &mixed(3)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = random_strategy(3, 2, 2, 4).unwrap();
        let j = StrategyJson::from(&s);
        let text = serde_json::to_string(&j).unwrap();
        let back: StrategyJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back, j);
        assert_eq!(AdaptiveStrategy::try_from(&back).unwrap(), s);
    }
}
