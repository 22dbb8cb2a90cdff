//! Exact Neyman–Pearson error for i.i.d. classical distributions.
//!
//! All sequences of one type (empirical count vector) share the same
//! likelihood ratio, so the optimal test of `p^{⊗n}` against `q^{⊗n}` only
//! needs the type classes sorted by that ratio. Class masses are handled in
//! the log domain, which keeps `β` meaningful far below `f64::MIN_POSITIVE`.

use serde::Serialize;

use crate::{Error, Result};

/// Upper limit on the number of type classes enumerated.
pub const MAX_TYPE_CLASSES: usize = 5_000_000;

const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalStein {
    /// `β_ε(p^{⊗n}‖q^{⊗n})`; underflows to zero for very long blocks.
    pub beta: f64,
    /// `log₂ β`, always accurate.
    pub log2_beta: f64,
    /// `−(1/n) log₂ β`.
    pub rate: f64,
}

fn check_distribution(p: &[f64], name: &str) -> Result<()> {
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::domain(format!("{name} has negative or non-finite entries")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > PROB_TOL {
        return Err(Error::domain(format!("{name} sums to {s}, not 1")));
    }
    Ok(())
}

/// Number of count vectors of length `k` summing to `n`, saturating.
fn type_count(n: usize, k: usize) -> usize {
    // C(n + k − 1, k − 1)
    let mut c: u128 = 1;
    for j in 1..k as u128 {
        c = c * (n as u128 + j) / j;
        if c > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    c as usize
}

fn for_each_type(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(pos: usize, left: usize, counts: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if pos + 1 == counts.len() {
            counts[pos] = left;
            f(counts);
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            rec(pos + 1, left - c, counts, f);
        }
    }
    let mut counts = vec![0; k];
    rec(0, n, &mut counts, f);
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

struct TypeClass {
    llr: f64,
    log_p: f64,
    log_q: f64,
}

/// Exact `β_ε` for `n` i.i.d. copies of `p` versus `q` and the rate `−(1/n) log₂ β_ε`.
pub fn classical_iid_stein(p: &[f64], q: &[f64], n: usize, epsilon: f64) -> Result<ClassicalStein> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::domain(format!("alphabets differ: {} vs {} symbols", p.len(), q.len())));
    }
    check_distribution(p, "p")?;
    check_distribution(q, "q")?;
    if n == 0 {
        return Err(Error::domain("block length must be positive"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    let k = p.len();
    if type_count(n, k) > MAX_TYPE_CLASSES {
        return Err(Error::domain(format!("{k} symbols and n = {n} give too many type classes")));
    }

    let mut log_fact = vec![0.0f64; n + 1];
    for j in 1..=n {
        log_fact[j] = log_fact[j - 1] + (j as f64).ln();
    }
    let lp: Vec<f64> = p.iter().map(|x| x.ln()).collect();
    let lq: Vec<f64> = q.iter().map(|x| x.ln()).collect();

    let mut classes = Vec::new();
    for_each_type(n, k, &mut |c| {
        let used = || c.iter().enumerate().filter(|(_, &ci)| ci > 0);
        if used().any(|(i, _)| p[i] == 0.0) {
            return;
        }
        let log_mult = log_fact[n] - c.iter().map(|&ci| log_fact[ci]).sum::<f64>();
        let log_p = log_mult + used().map(|(i, &ci)| ci as f64 * lp[i]).sum::<f64>();
        let log_q = if used().any(|(i, _)| q[i] == 0.0) {
            f64::NEG_INFINITY
        } else {
            log_mult + used().map(|(i, &ci)| ci as f64 * lq[i]).sum::<f64>()
        };
        classes.push(TypeClass { llr: log_p - log_q, log_p, log_q });
    });
    classes.sort_by(|a, b| b.llr.total_cmp(&a.llr));

    // accept the most p-likely classes until the p-mass reaches 1 − ε
    let target = 1.0 - epsilon;
    let mut mass = 0.0;
    let mut logs_q = Vec::new();
    for c in &classes {
        let pm = c.log_p.exp();
        if mass + pm >= target {
            let gamma = ((target - mass) / pm).clamp(0.0, 1.0);
            if gamma > 0.0 {
                logs_q.push(gamma.ln() + c.log_q);
            }
            break;
        }
        mass += pm;
        logs_q.push(c.log_q);
    }
    let ln_beta = log_sum_exp(&logs_q);
    let log2_beta = ln_beta / std::f64::consts::LN_2;
    Ok(ClassicalStein { beta: ln_beta.exp(), log2_beta, rate: -log2_beta / n as f64 })
}

/// Classical relative entropy `Σ p log₂(p/q)`.
pub fn classical_relative_entropy(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| if b == 0.0 { f64::INFINITY } else { a * (a / b).log2() })
        .sum()
}
