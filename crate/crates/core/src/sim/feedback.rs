//! Feedback-assisted classical communication over `n` channel uses.
//!
//! Alice and Bob start from a shared state on `X₀B₀'`. In round `i` Alice
//! applies `ℰ^i_m: A'_{i−1}X_{i−1} → A'_iA_i` for message `m`, `A_i` crosses
//! the channel to `B_i`, and (for `i < n`) Bob applies
//! `𝒟^i: B_iB'_{i−1} → X_iB'_i`, returning `X_i` to Alice over a noiseless
//! feedback link. A final POVM `{D^m}` on `B_nB'_{n−1}` guesses the message.
//! Per message the joint state is kept with factors `[A'_i, A_i or B_i, B'_{i−1}]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::BoundCheck;
use crate::channel::channel_mutual_information;
use crate::divergences::RenyiFamily;
use crate::qmat::json::{ChannelJson, StateJson};
use crate::qmat::linalg::{self, psd_power, ComplexMatrix};
use crate::qmat::random::{ginibre_with, random_channel_with, random_state_with, rng_from_seed};
use crate::qmat::{DensityOperator, HermitianOperator, KrausChannel, PureState};
use crate::{Error, Result};

/// Slack on `Σ_m D^m = I` and on the POVM elements being PSD.
pub const POVM_TOL: f64 = 1e-9;

/// Slack on the replacer identity `Tr T τ = 1/M`.
pub const REPLACER_TOL: f64 = 1e-9;

/// Slack for the feedback bound.
pub const FEEDBACK_BOUND_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackProtocol {
    shared_state: DensityOperator,
    /// `encoders[i][m]` is `ℰ^{i+1}_m`.
    encoders: Vec<Vec<KrausChannel>>,
    /// `decoders[i]` is `𝒟^{i+1}`, one per round except the last.
    decoders: Vec<KrausChannel>,
    /// `feedback_dims[i]` is `dim X_{i+1}`.
    feedback_dims: Vec<usize>,
    povm: Vec<HermitianOperator>,
    dim_a: usize,
    dim_b: usize,
    /// `dim A'_i` for `i = 1..n`.
    memory_dims: Vec<usize>,
    /// `dim B'_i` for `i = 0..n−1`.
    bob_dims: Vec<usize>,
}

impl FeedbackProtocol {
    /// Validates the chaining of every system; `shared_state` has dims `[d_{X₀}, d_{B₀'}]`.
    pub fn new(
        shared_state: DensityOperator,
        encoders: Vec<Vec<KrausChannel>>,
        decoders: Vec<KrausChannel>,
        feedback_dims: Vec<usize>,
        povm: Vec<HermitianOperator>,
        dim_a: usize,
        dim_b: usize,
    ) -> Result<Self> {
        let n = encoders.len();
        if n == 0 {
            return Err(Error::domain("a protocol needs at least one channel use"));
        }
        if decoders.len() != n - 1 || feedback_dims.len() != n - 1 {
            return Err(Error::domain(format!(
                "{n} rounds need {} decoders and feedback dimensions, got {} and {}",
                n - 1,
                decoders.len(),
                feedback_dims.len()
            )));
        }
        let m_count = povm.len();
        if m_count < 1 {
            return Err(Error::domain("the POVM has no elements"));
        }
        let dims = shared_state.dims();
        if dims.len() != 2 {
            return Err(Error::domain("shared state must be bipartite X₀B₀'"));
        }
        let mut alice_in = dims[0];
        let mut bob_dims = vec![dims[1]];
        let mut memory_dims = Vec::with_capacity(n);
        for (i, round) in encoders.iter().enumerate() {
            if round.len() != m_count {
                return Err(Error::domain(format!(
                    "round {} has {} encoders for {m_count} messages",
                    i + 1,
                    round.len()
                )));
            }
            let d_out = round[0].dim_out();
            for (m, e) in round.iter().enumerate() {
                if e.dim_in() != alice_in || e.dim_out() != d_out {
                    return Err(Error::domain(format!(
                        "encoder for message {} in round {} maps {} → {}, expected {alice_in} → {d_out}",
                        m + 1,
                        i + 1,
                        e.dim_in(),
                        e.dim_out()
                    )));
                }
            }
            if d_out % dim_a != 0 {
                return Err(Error::domain(format!("encoder output {d_out} is not a multiple of d_A = {dim_a}")));
            }
            let d_mem = d_out / dim_a;
            memory_dims.push(d_mem);
            if let Some(dec) = decoders.get(i) {
                let b_prev = *bob_dims.last().unwrap();
                let dx = feedback_dims[i];
                if dec.dim_in() != dim_b * b_prev || dx == 0 || dec.dim_out() % dx != 0 {
                    return Err(Error::domain(format!(
                        "decoder {} maps {} → {}, which does not chain with B_{}B'_{} ({}) and X_{} ({dx})",
                        i + 1,
                        dec.dim_in(),
                        dec.dim_out(),
                        i + 1,
                        i,
                        dim_b * b_prev,
                        i + 1
                    )));
                }
                bob_dims.push(dec.dim_out() / dx);
                alice_in = d_mem * dx;
            }
        }
        let final_dim = dim_b * bob_dims.last().unwrap();
        let mut sum = ComplexMatrix::zeros(final_dim, final_dim);
        for (m, d) in povm.iter().enumerate() {
            if d.dim() != final_dim {
                return Err(Error::domain(format!(
                    "POVM element {} has dimension {}, B_nB'_{{n−1}} has {final_dim}",
                    m + 1,
                    d.dim()
                )));
            }
            if d.eigh().min() < -POVM_TOL {
                return Err(Error::domain(format!("POVM element {} is not positive semidefinite", m + 1)));
            }
            sum += d.matrix();
        }
        let defect = linalg::max_abs_diff(&sum, &ComplexMatrix::identity(final_dim, final_dim));
        if defect > POVM_TOL {
            return Err(Error::domain(format!("POVM elements sum to identity only within {defect:.3e}")));
        }
        let b_last = *bob_dims.last().unwrap();
        let povm = povm.into_iter().map(|d| d.with_dims(vec![dim_b, b_last])).collect::<Result<Vec<_>>>()?;
        Ok(Self { shared_state, encoders, decoders, feedback_dims, povm, dim_a, dim_b, memory_dims, bob_dims })
    }

    pub fn n_uses(&self) -> usize {
        self.encoders.len()
    }

    pub fn message_count(&self) -> usize {
        self.povm.len()
    }

    pub fn shared_state(&self) -> &DensityOperator {
        &self.shared_state
    }

    pub fn povm(&self) -> &[HermitianOperator] {
        &self.povm
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }
}

/// What occupies the channel slot in every round.
enum Slot<'a> {
    Channel(&'a KrausChannel),
    Replacer(&'a HermitianOperator),
}

impl Slot<'_> {
    /// Acts on the middle factor of `[A', A, B']`.
    fn apply(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        match self {
            Slot::Channel(ch) => ch.apply(x, 1),
            Slot::Replacer(sigma) => x.partial_trace(&[0, 2])?.tensor(sigma).permute(&[0, 2, 1]),
        }
    }
}

/// `ρ^m_{B_nB'_{n−1}}` for every message.
fn final_states(p: &FeedbackProtocol, slot: &Slot) -> Result<Vec<HermitianOperator>> {
    let n = p.n_uses();
    (0..p.message_count())
        .map(|m| {
            let mut x = p.shared_state.operator().clone();
            for i in 0..n {
                let b_prev = p.bob_dims[i];
                let d_mem = p.memory_dims[i];
                let enc = &p.encoders[i][m];
                let flat_alice = x.with_dims(vec![x.dim() / b_prev, b_prev])?;
                x = enc.apply(&flat_alice, 0)?.with_dims(vec![d_mem, p.dim_a, b_prev])?;
                x = slot.apply(&x)?;
                if let Some(dec) = p.decoders.get(i) {
                    let y = dec.apply(&x.with_dims(vec![d_mem, p.dim_b * b_prev])?, 1)?;
                    let (dx, b_next) = (p.feedback_dims[i], p.bob_dims[i + 1]);
                    // regroup [A'_i, X_i, B'_i] as [A'_iX_i, B'_i] for the next encoder
                    x = y.with_dims(vec![d_mem * dx, b_next])?;
                }
            }
            x.partial_trace(&[1, 2])
        })
        .collect()
}

fn success_probability(p: &FeedbackProtocol, states: &[HermitianOperator]) -> f64 {
    let total: f64 = p.povm.iter().zip(states).map(|(d, rho)| d.expectation(rho)).sum();
    (total / p.message_count() as f64).clamp(0.0, 1.0)
}

fn check_dims(p: &FeedbackProtocol, d_in: usize, d_out: usize) -> Result<()> {
    if d_in != p.dim_a || d_out != p.dim_b {
        return Err(Error::domain(format!(
            "channel maps {d_in} → {d_out}, protocol expects {} → {}",
            p.dim_a, p.dim_b
        )));
    }
    Ok(())
}

/// `p_succ = (1/M) Σ_m Tr D^m ρ^m`.
pub fn run_feedback(p: &FeedbackProtocol, ch: &KrausChannel) -> Result<f64> {
    check_dims(p, ch.dim_in(), ch.dim_out())?;
    let states = final_states(p, &Slot::Channel(ch))?;
    Ok(success_probability(p, &states))
}

/// Success probability when every use of the channel is replaced by `ℛ_σ`,
/// without checking it against `1/M`.
pub fn replacer_success_probability(p: &FeedbackProtocol, sigma: &DensityOperator) -> Result<f64> {
    check_dims(p, p.dim_a, sigma.dim())?;
    let sigma = sigma.operator().with_dims(vec![sigma.dim()])?;
    let states = final_states(p, &Slot::Replacer(&sigma))?;
    Ok(success_probability(p, &states))
}

/// Success probability when every use of the channel is replaced by `ℛ_σ`.
/// Fails if it deviates from `1/M` by more than [`REPLACER_TOL`].
pub fn run_feedback_replacer(p: &FeedbackProtocol, sigma: &DensityOperator) -> Result<f64> {
    let ps = replacer_success_probability(p, sigma)?;
    let expected = 1.0 / p.message_count() as f64;
    if (ps - expected).abs() > REPLACER_TOL {
        return Err(Error::domain(format!("replacer branch succeeds with {ps}, expected 1/M = {expected}")));
    }
    Ok(ps)
}

fn check_order(alpha: f64) -> Result<()> {
    if !(alpha > 1.0) || alpha.is_infinite() {
        return Err(Error::domain(format!("the bound needs a finite order α > 1, got {alpha}")));
    }
    Ok(())
}

/// `(α/(α−1))(1/n) log p_succ + (1/n) log M ≤ Ĩ_α(𝒩)`.
pub fn feedback_bound_check(p: &FeedbackProtocol, ch: &KrausChannel, alpha: f64) -> Result<BoundCheck> {
    check_order(alpha)?;
    let info = channel_mutual_information(ch, alpha, RenyiFamily::Sandwiched)?.value();
    feedback_bound_check_with(p, ch, alpha, info)
}

/// [`feedback_bound_check`] with a precomputed `Ĩ_α(𝒩)`.
pub fn feedback_bound_check_with(p: &FeedbackProtocol, ch: &KrausChannel, alpha: f64, info: f64) -> Result<BoundCheck> {
    check_order(alpha)?;
    let ps = run_feedback(p, ch)?;
    let n = p.n_uses() as f64;
    let lhs = alpha / (alpha - 1.0) * ps.log2() / n + (p.message_count() as f64).log2() / n;
    Ok(BoundCheck::new(lhs, info, FEEDBACK_BOUND_TOL))
}

fn paulis() -> [ComplexMatrix; 4] {
    use num_complex::Complex64 as C;
    let (o, l, i) = (C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 1.0));
    [
        ComplexMatrix::identity(2, 2),
        ComplexMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        ComplexMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        ComplexMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    ]
}

/// Superdense coding: shared `Φ`, Pauli encoders, Bell measurement. Sends two
/// bits with one qubit channel use.
pub fn superdense_coding() -> FeedbackProtocol {
    let phi = PureState::maximally_entangled(2);
    let encoders = vec![paulis().iter().map(|u| KrausChannel::new(2, 2, vec![u.clone()]).expect("unitary")).collect()];
    let povm = paulis()
        .iter()
        .map(|u| {
            let v = u.kronecker(&ComplexMatrix::identity(2, 2)) * phi.amplitudes();
            HermitianOperator::from_raw(linalg::outer(&v, &v), vec![2, 2])
        })
        .collect();
    FeedbackProtocol::new(phi.to_density(), encoders, vec![], vec![], povm, 2, 2).expect("superdense coding is well formed")
}

/// POVM `D^m = S^{−1/2} G_m S^{−1/2}` from random positive `G_m`, `S = Σ G_m`.
pub fn random_povm_with<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Result<Vec<HermitianOperator>> {
    let gs: Vec<ComplexMatrix> = (0..m)
        .map(|_| {
            let g = ginibre_with(d, d, rng);
            &g * g.adjoint()
        })
        .collect();
    let s = gs.iter().fold(ComplexMatrix::zeros(d, d), |acc, g| acc + g);
    let w = psd_power(&linalg::hermitian_part(&s), -0.5)?;
    Ok(gs.iter().map(|g| HermitianOperator::from_raw(linalg::hermitian_part(&(&w * g * &w)), vec![d])).collect())
}

/// Seeded random protocol with qubit-sized memories, feedback and Bob registers.
pub fn random_protocol(n: usize, messages: usize, dim_a: usize, dim_b: usize, seed: u64) -> Result<FeedbackProtocol> {
    random_protocol_with(n, messages, dim_a, dim_b, &mut rng_from_seed(seed))
}

pub fn random_protocol_with<R: Rng + ?Sized>(
    n: usize,
    messages: usize,
    dim_a: usize,
    dim_b: usize,
    rng: &mut R,
) -> Result<FeedbackProtocol> {
    if n == 0 || messages == 0 {
        return Err(Error::domain("need at least one round and one message"));
    }
    const REG: usize = 2;
    let shared = random_state_with(REG * REG, rng).with_dims(vec![REG, REG])?;
    let mut encoders = Vec::with_capacity(n);
    let mut decoders = Vec::with_capacity(n - 1);
    let mut alice_in = REG;
    let mut bob = REG;
    for i in 0..n {
        // the last memory register is never read
        let d_mem = if i + 1 == n { 1 } else { REG };
        let d_out = d_mem * dim_a;
        let kraus = alice_in.div_ceil(d_out).max(2);
        encoders.push((0..messages).map(|_| random_channel_with(alice_in, d_out, kraus, rng)).collect());
        if i + 1 < n {
            let (d_in, d_out) = (dim_b * bob, REG * REG);
            decoders.push(random_channel_with(d_in, d_out, d_in.div_ceil(d_out).max(2), rng));
            alice_in = d_mem * REG;
            bob = REG;
        }
    }
    let povm = random_povm_with(dim_b * bob, messages, rng)?;
    FeedbackProtocol::new(shared, encoders, decoders, vec![REG; n - 1], povm, dim_a, dim_b)
}

/// JSON form of a [`FeedbackProtocol`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolJson {
    pub dim_a: usize,
    pub dim_b: usize,
    pub shared_state: StateJson,
    pub encoders: Vec<Vec<ChannelJson>>,
    pub decoders: Vec<ChannelJson>,
    pub feedback_dims: Vec<usize>,
    pub povm: Vec<StateJson>,
}

impl From<&FeedbackProtocol> for ProtocolJson {
    fn from(p: &FeedbackProtocol) -> Self {
        Self {
            dim_a: p.dim_a,
            dim_b: p.dim_b,
            shared_state: StateJson::from(p.shared_state.operator()),
            encoders: p.encoders.iter().map(|r| r.iter().map(ChannelJson::from).collect()).collect(),
            decoders: p.decoders.iter().map(ChannelJson::from).collect(),
            feedback_dims: p.feedback_dims.clone(),
            povm: p.povm.iter().map(StateJson::from).collect(),
        }
    }
}

impl TryFrom<&ProtocolJson> for FeedbackProtocol {
    type Error = Error;
    fn try_from(j: &ProtocolJson) -> Result<Self> {
        let shared = DensityOperator::try_from(&j.shared_state)?;
        let encoders = j
            .encoders
            .iter()
            .map(|r| r.iter().map(KrausChannel::try_from).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let decoders = j.decoders.iter().map(KrausChannel::try_from).collect::<Result<Vec<_>>>()?;
        let povm = j.povm.iter().map(HermitianOperator::try_from).collect::<Result<Vec<_>>>()?;
        FeedbackProtocol::new(shared, encoders, decoders, j.feedback_dims.clone(), povm, j.dim_a, j.dim_b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{presets, random_state, ReplacerSpec};

    #[test]
    fn superdense_coding_is_perfect() {
        let p = superdense_coding();
        let ps = run_feedback(&p, &presets::identity(2)).unwrap();
        assert!((ps - 1.0).abs() < 1e-12);
        let c = feedback_bound_check_with(&p, &presets::identity(2), 2.0, 2.0).unwrap();
        assert!((c.lhs - 2.0).abs() < 1e-12 && c.ok);
    }

    #[test]
    fn superdense_over_dephasing_halves() {
        // Z-dephasing destroys the X/Y distinction: two of four Bell states survive per pair
        let ps = run_feedback(&superdense_coding(), &presets::dephasing(2, 1.0).unwrap()).unwrap();
        assert!((ps - 0.5).abs() < 1e-12, "{ps}");
    }

    #[test]
    fn replacer_gives_chance_level() {
        let sigma = random_state(2, 3);
        for (seed, (n, m)) in [(1, 2), (1, 4), (2, 2), (3, 3)].into_iter().enumerate() {
            let p = random_protocol(n, m, 2, 2, seed as u64).unwrap();
            let ps = run_feedback_replacer(&p, &sigma).unwrap();
            let via_channel = run_feedback(&p, &ReplacerSpec::new(sigma.clone()).unwrap().to_channel(2)).unwrap();
            assert!((ps - 1.0 / m as f64).abs() < 1e-9);
            assert!((ps - via_channel).abs() < 1e-12);
        }
    }

    #[test]
    fn replacer_bound_is_negative() {
        let sigma = DensityOperator::maximally_mixed(2);
        let ch = ReplacerSpec::new(sigma).unwrap().to_channel(2);
        let p = random_protocol(1, 4, 2, 2, 0).unwrap();
        let c = feedback_bound_check_with(&p, &ch, 2.0, 0.0).unwrap();
        // 2·log(1/4) + log 4 = −2
        assert!((c.lhs + 2.0).abs() < 1e-9 && c.ok);
    }

    #[test]
    fn random_protocol_is_valid() {
        let p = random_protocol(1, 2, 2, 2, 5).unwrap();
        let ps = run_feedback(&p, &crate::qmat::random_channel(2, 2, 2, 1)).unwrap();
        assert!((0.0..=1.0).contains(&ps));
        let sum = p.povm().iter().fold(ComplexMatrix::zeros(4, 4), |a, d| a + d.matrix());
        assert!(linalg::max_abs_diff(&sum, &ComplexMatrix::identity(4, 4)) < 1e-12);
    }

    fn two_round_relay() -> FeedbackProtocol {
        // round 1 sends |0⟩ while Alice keeps X₀; Bob feeds B₁ back unchanged;
        // round 2 flips the returned qubit according to the message
        let ket = |i: usize| {
            let mut v = ComplexMatrix::zeros(2, 1);
            v[(i, 0)] = 1.0.into();
            v
        };
        let id2 = ComplexMatrix::identity(2, 2);
        let store = KrausChannel::new(2, 4, vec![id2.kronecker(&ket(0))]).unwrap();
        let relay = |u: &ComplexMatrix| {
            let kraus = (0..2).map(|j| u * ket(j).adjoint().kronecker(&id2)).collect();
            KrausChannel::new(4, 2, kraus).unwrap()
        };
        let shared = DensityOperator::basis(4, 0).with_dims(vec![2, 2]).unwrap();
        let encoders = vec![vec![store.clone(), store], vec![relay(&paulis()[0]), relay(&paulis()[1])]];
        let decoders = vec![presets::identity(4)];
        let povm = (0..2)
            .map(|m| HermitianOperator::from_raw((ket(m) * ket(m).adjoint()).kronecker(&id2), vec![2, 2]))
            .collect();
        FeedbackProtocol::new(shared, encoders, decoders, vec![2], povm, 2, 2).unwrap()
    }

    #[test]
    fn feedback_link_carries_the_message() {
        let p = two_round_relay();
        assert!((run_feedback(&p, &presets::identity(2)).unwrap() - 1.0).abs() < 1e-12);
        assert!((run_feedback(&p, &presets::dephasing(2, 1.0).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        // bit flip with probability 0.3 in each of the two uses
        let k0 = ComplexMatrix::identity(2, 2).scale(0.7f64.sqrt());
        let k1 = paulis()[1].scale(0.3f64.sqrt());
        let flip = KrausChannel::new(2, 2, vec![k0, k1]).unwrap();
        let expected = 0.7 * 0.7 + 0.3 * 0.3;
        assert!((run_feedback(&p, &flip).unwrap() - expected).abs() < 1e-12);
        assert!((run_feedback_replacer(&p, &random_state(2, 1)).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn chaining_mismatch_is_rejected() {
        let p = superdense_coding();
        assert!(run_feedback(&p, &presets::identity(3)).is_err());
        let bad = FeedbackProtocol::new(
            PureState::maximally_entangled(2).to_density(),
            vec![vec![presets::identity(3)]],
            vec![],
            vec![],
            vec![HermitianOperator::identity(vec![4])],
            2,
            2,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = random_protocol(2, 3, 2, 2, 7).unwrap();
        let j = ProtocolJson::from(&p);
        let back: ProtocolJson = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
        assert_eq!(back, j);
        assert_eq!(FeedbackProtocol::try_from(&back).unwrap(), p);
    }
}
