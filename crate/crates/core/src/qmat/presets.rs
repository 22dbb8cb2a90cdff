//! Named channels used by the CLI and the test suites.

use num_complex::Complex64;

use super::channel::{KrausChannel, ReplacerSpec};
use super::linalg::ComplexMatrix;
use super::operator::DensityOperator;
use crate::{Error, Result};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn nonzero(kraus: Vec<ComplexMatrix>) -> Vec<ComplexMatrix> {
    kraus.into_iter().filter(|k| k.iter().any(|z| z.norm() > 0.0)).collect()
}

pub fn identity(d: usize) -> KrausChannel {
    KrausChannel::new(d, d, vec![ComplexMatrix::identity(d, d)]).expect("identity is a channel")
}

/// `ρ ↦ (1−p) ρ + p Σ_i ⟨i|ρ|i⟩ |i⟩⟨i|`; `p = 1` is the completely dephasing channel.
pub fn dephasing(d: usize, p: f64) -> Result<KrausChannel> {
    check_probability("dephasing parameter", p)?;
    let mut kraus = vec![ComplexMatrix::identity(d, d).scale((1.0 - p).sqrt())];
    for i in 0..d {
        let mut k = ComplexMatrix::zeros(d, d);
        k[(i, i)] = c(p.sqrt());
        kraus.push(k);
    }
    KrausChannel::new(d, d, nonzero(kraus))
}

/// `ρ ↦ (1−p) ρ + p Tr(ρ) I/d`, with Weyl–Heisenberg Kraus operators.
pub fn depolarizing(d: usize, p: f64) -> Result<KrausChannel> {
    check_probability("depolarizing parameter", p)?;
    let n2 = (d * d) as f64;
    let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / d as f64);
    let mut kraus = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let weight = if a == 0 && b == 0 { 1.0 - p + p / n2 } else { p / n2 };
            // X^a Z^b |j⟩ = ω^{bj} |j+a⟩
            let mut k = ComplexMatrix::zeros(d, d);
            for j in 0..d {
                k[((j + a) % d, j)] = omega.powu((b * j) as u32) * weight.sqrt();
            }
            kraus.push(k);
        }
    }
    KrausChannel::new(d, d, nonzero(kraus))
}

/// Qubit amplitude damping with decay probability `gamma`.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    generalized_amplitude_damping(gamma, 0.0)
}

/// Qubit generalized amplitude damping: relaxation with probability `gamma`
/// towards the thermal state `diag(1 − n, n)`.
pub fn generalized_amplitude_damping(gamma: f64, n: f64) -> Result<KrausChannel> {
    check_probability("damping parameter", gamma)?;
    check_probability("thermal population", n)?;
    let (a, b) = ((1.0 - n).sqrt(), n.sqrt());
    let (g, h) = (gamma.sqrt(), (1.0 - gamma).sqrt());
    let m = |x: [[f64; 2]; 2]| ComplexMatrix::from_row_slice(2, 2, &[c(x[0][0]), c(x[0][1]), c(x[1][0]), c(x[1][1])]);
    let kraus = vec![
        m([[a, 0.0], [0.0, a * h]]),
        m([[0.0, a * g], [0.0, 0.0]]),
        m([[b * h, 0.0], [0.0, b]]),
        m([[0.0, 0.0], [b * g, 0.0]]),
    ];
    KrausChannel::new(2, 2, nonzero(kraus))
}

/// Qubit illumination toy model.
///
/// The null hypothesis is transmission through a lossy thermal link
/// (generalized amplitude damping with loss `1 − eta` towards thermal
/// population `mix`); the alternative is the thermal replacer
/// `diag(1 − mix, mix)`, i.e. the object is absent and only background
/// reaches the receiver. `eta = 1` gives a perfect channel.
pub fn illumination_toy(eta: f64, mix: f64) -> Result<(KrausChannel, ReplacerSpec)> {
    check_probability("transmissivity", eta)?;
    let ch = generalized_amplitude_damping(1.0 - eta, mix)?;
    let thermal = DensityOperator::diagonal(&[1.0 - mix, mix])?;
    Ok((ch, ReplacerSpec::new(thermal)?))
}

/// A preset resolved from its name.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: String,
    pub channel: KrausChannel,
    /// Alternative hypothesis shipped with the preset, if any.
    pub alternative: Option<ReplacerSpec>,
}

/// Resolve names such as `identity_2`, `dephasing_0.3`, `depolarizing_0.1`,
/// `amplitude_damping_0.3`, `replacer`, `replacer_3`, `illumination_toy_0.8_0.1`.
///
/// Qubit presets accept an optional trailing dimension for the dephasing and
/// depolarizing families (`dephasing_0.3_3`). The replacer uses `sigma` when
/// given and the maximally mixed state otherwise.
pub fn by_name(name: &str, sigma: Option<&DensityOperator>) -> Result<Preset> {
    let bad = || Error::domain(format!("unknown preset '{name}'"));
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
    let int = |s: &str| s.parse::<usize>().ok().filter(|&d| d > 0).ok_or_else(bad);

    let (family, args) = split_preset(name);
    let args: Vec<&str> = args;
    let (channel, alternative) = match (family, args.as_slice()) {
        ("identity", [d]) => (identity(int(d)?), None),
        ("identity", []) => (identity(2), None),
        ("dephasing", [p]) => (dephasing(2, num(p)?)?, None),
        ("dephasing", [p, d]) => (dephasing(int(d)?, num(p)?)?, None),
        ("depolarizing", [p]) => (depolarizing(2, num(p)?)?, None),
        ("depolarizing", [p, d]) => (depolarizing(int(d)?, num(p)?)?, None),
        ("amplitude_damping", [p]) => (amplitude_damping(num(p)?)?, None),
        ("replacer", rest) => {
            let spec = match sigma {
                Some(s) => ReplacerSpec::new(s.clone())?,
                None => ReplacerSpec::maximally_mixed(2),
            };
            let d_in = match rest {
                [] => spec.dim_out(),
                [d] => int(d)?,
                _ => return Err(bad()),
            };
            (spec.to_channel(d_in), Some(spec))
        }
        ("illumination_toy", [eta, mix]) => {
            let (ch, alt) = illumination_toy(num(eta)?, num(mix)?)?;
            (ch, Some(alt))
        }
        _ => return Err(bad()),
    };
    Ok(Preset { name: name.to_string(), channel, alternative })
}

fn split_preset(name: &str) -> (&str, Vec<&str>) {
    for family in ["amplitude_damping", "illumination_toy", "identity", "dephasing", "depolarizing", "replacer"] {
        if let Some(rest) = name.strip_prefix(family) {
            if rest.is_empty() {
                return (family, Vec::new());
            }
            if let Some(rest) = rest.strip_prefix('_') {
                return (family, rest.split('_').collect());
            }
        }
    }
    (name, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::linalg::max_abs_diff;
    use crate::qmat::operator::PureState;
    use crate::qmat::random::random_state;

    #[test]
    fn presets_are_channels() {
        for name in [
            "identity_2",
            "identity_3",
            "dephasing_0.3",
            "dephasing_1_3",
            "depolarizing_0.1",
            "depolarizing_0.5_3",
            "amplitude_damping_0.3",
            "replacer",
            "illumination_toy_0.7_0.2",
        ] {
            let p = by_name(name, None).unwrap();
            assert!(p.channel.tp_residual() < 1e-12, "{name}");
        }
        assert!(by_name("teleporter_2", None).is_err());
        assert!(by_name("dephasing_1.5", None).is_err());
    }

    #[test]
    fn depolarizing_matches_definition() {
        let rho = random_state(3, 8);
        let p = 0.37;
        let out = depolarizing(3, p).unwrap().apply(&rho, 0).unwrap();
        let expected = rho.matrix().scale(1.0 - p) + ComplexMatrix::identity(3, 3).scale(p / 3.0);
        assert!(max_abs_diff(out.matrix(), &expected) < 1e-14);
    }

    #[test]
    fn identity_preset_fixes_maximally_entangled() {
        let phi = PureState::maximally_entangled(2).to_density();
        let out = by_name("identity_2", None).unwrap().channel.apply(&phi, 1).unwrap();
        assert!(max_abs_diff(out.matrix(), phi.matrix()) < 1e-15);
    }

    #[test]
    fn illumination_toy_degenerates_to_identity() {
        let (ch, alt) = illumination_toy(1.0, 0.0).unwrap();
        let rho = random_state(2, 3);
        let out = ch.apply(&rho, 0).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);
        assert!(max_abs_diff(alt.sigma().matrix(), DensityOperator::basis(2, 0).matrix()) < 1e-15);
    }

    #[test]
    fn full_loss_is_the_thermal_replacer() {
        let (ch, alt) = illumination_toy(0.0, 0.3).unwrap();
        let out = ch.apply(&random_state(2, 4), 0).unwrap();
        assert!(max_abs_diff(out.matrix(), alt.sigma().matrix()) < 1e-15);
    }

    #[test]
    fn complete_amplitude_damping_outputs_ground_state() {
        let ch = amplitude_damping(1.0).unwrap();
        let out = ch.apply(&random_state(2, 6), 0).unwrap();
        assert!(max_abs_diff(out.matrix(), DensityOperator::basis(2, 0).matrix()) < 1e-15);
    }
}
