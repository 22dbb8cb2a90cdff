//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line with its
//! measured runtime; criteria run one at a time so runtimes are not inflated
//! by each other.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use renyikit::channel::{
    channel_max_relative_entropy, channel_renyi_divergence, composite_sc_bounds, composite_stein_exponent,
    feedback_sc_exponent, stein_exponent, strong_converse_exponent, ChannelDivergenceQuery, SecondChannel,
};
use renyikit::divergences::{DivergenceValue, RenyiFamily};
use renyikit::qmat::presets;
use renyikit::qmat::random::{random_channel, random_channel_with, random_state, rng_from_seed};
use renyikit::qmat::ReplacerSpec;
use renyikit::sim::{classical_iid_stein, optimal_tensor_strategy, renyi_cb_bound_check};
use renyikit::verify::{full_support_state_with, run_suite, CheckRecord, Suite};

static SERIAL: Mutex<()> = Mutex::new(());

struct Criterion {
    id: &'static str,
    title: &'static str,
    budget: Duration,
    start: Instant,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    fn new(id: &'static str, title: &'static str, budget_secs: u64) -> Self {
        Self { id, title, budget: Duration::from_secs(budget_secs), start: Instant::now(), failures: Vec::new(), notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol, format!("{what} = {got:.6} (want {want} ± {tol:e})"));
    }

    /// Every record of a suite run must pass.
    fn records(&mut self, label: &str, recs: &[CheckRecord]) {
        let bad: Vec<_> = recs.iter().filter(|r| !r.ok).collect();
        let worst = recs
            .iter()
            .filter(|r| r.lhs != r.rhs)
            .map(|r| r.lhs - r.rhs)
            .filter(|x| x.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        let msg = format!("{label}: {}/{} records pass (max lhs − rhs {worst:.2e})", recs.len() - bad.len(), recs.len());
        if let Some(b) = bad.first() {
            self.check(false, format!("{msg}; first failure {} seed {}: lhs {} rhs {}", b.check, b.seed, b.lhs, b.rhs));
        } else {
            self.check(true, msg);
        }
    }

    fn finish(self) {
        let elapsed = self.start.elapsed();
        let in_time = elapsed <= self.budget;
        let ok = self.failures.is_empty() && in_time;
        println!(
            "{} {} {} ({:.2} s, budget {} s)",
            self.id,
            if ok { "PASS" } else { "FAIL" },
            self.title,
            elapsed.as_secs_f64(),
            self.budget.as_secs()
        );
        for n in &self.notes {
            println!("    ok   {n}");
        }
        for f in &self.failures {
            println!("    FAIL {f}");
        }
        if !in_time {
            println!("    FAIL runtime over budget");
        }
        assert!(ok, "{} failed", self.id);
    }
}

fn seeds(n: u64) -> Vec<u64> {
    (0..n).collect()
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

#[test]
fn ac1_divergence_identities() {
    let _g = lock();
    let mut c = Criterion::new("AC1", "divergence identities on 100 random qubit/qutrit pairs", 10);
    let recs = run_suite(Suite::MonotoneAlpha, &seeds(100), None).unwrap();
    for check in ["entropytonorm", "ordering", "monotone/sandwiched", "monotone/petz", "alpha-one-limit"] {
        let sub: Vec<_> = recs.iter().filter(|r| r.check == check).cloned().collect();
        c.check(!sub.is_empty(), format!("{check} evaluated"));
        c.records(check, &sub);
    }
    c.finish();
}

#[test]
fn ac2_data_processing() {
    let _g = lock();
    let mut c = Criterion::new("AC2", "data processing on 100 random triples", 30);
    let recs = run_suite(Suite::Dpi, &seeds(100), None).unwrap();
    c.check(recs.len() == 200, format!("{} records", recs.len()));
    c.records("dpi", &recs);
    c.finish();
}

#[test]
fn ac3_nagaoka_and_hypothesis_testing_bound() {
    let _g = lock();
    let mut c = Criterion::new("AC3", "Nagaoka inequality and D_H bound, 100 instances x 100 tests", 30);
    let recs = run_suite(Suite::Nagaoka, &seeds(100), None).unwrap();
    c.records("nagaoka + htre + np-optimality", &recs);
    c.finish();
}

#[test]
fn ac4_parameterization_cb_norm_and_chain() {
    let _g = lock();
    let mut c = Criterion::new("AC4", "pointwise identity, CB-norm equality and norm chain on 50 channels", 60);
    for suite in [Suite::Lemma4, Suite::Lemma6, Suite::AppendixA] {
        let recs = run_suite(suite, &seeds(50), Some(1e-5)).unwrap();
        c.check(recs.len() == 50, format!("{suite}: {} records", recs.len()));
        c.records(suite.name(), &recs);
    }
    c.finish();
}

#[test]
fn ac5_closed_form_exponents() {
    let _g = lock();
    let mut c = Criterion::new("AC5", "closed-form exponents", 120);
    let id = presets::identity(2);
    let half = ReplacerSpec::maximally_mixed(2);

    c.close("D(id2 || R_I/2)", stein_exponent(&id, &half).unwrap().value(), 2.0, 1e-3);
    let q = ChannelDivergenceQuery::replacer(id.clone(), half.clone(), 2.0, RenyiFamily::Sandwiched).unwrap();
    c.close("D~2(id2 || R_I/2)", channel_renyi_divergence(&q).unwrap().value(), 2.0, 1e-3);
    c.close("sc(3) for (id2, I/2)", strong_converse_exponent(&id, &half, 3.0).unwrap().value(), 1.0, 1e-3);
    c.close("feedback exponent of id2 at R = 3", feedback_sc_exponent(&id, 3.0).unwrap().value(), 1.0, 1e-3);

    for (d_in, seed) in [(2, 1u64), (3, 2)] {
        let sigma = ReplacerSpec::new(random_state(2, seed)).unwrap();
        let ch = sigma.to_channel(d_in);
        let mut zeros = vec![stein_exponent(&ch, &sigma).unwrap().value];
        zeros.push(channel_max_relative_entropy(&ch, &SecondChannel::Replacer(sigma.clone())).unwrap());
        for family in [RenyiFamily::Petz, RenyiFamily::Sandwiched] {
            for alpha in [0.5, 1.5, 2.0] {
                let q = ChannelDivergenceQuery::replacer(ch.clone(), sigma.clone(), alpha, family).unwrap();
                zeros.push(channel_renyi_divergence(&q).unwrap().value);
            }
        }
        let all_zero = zeros.iter().all(|v| *v == DivergenceValue::ZERO);
        c.check(all_zero, format!("replacer self-comparisons (d_in = {d_in}) exactly 0: {zeros:?}"));
    }

    let delta = presets::dephasing(2, 1.0).unwrap();
    let rep = stein_exponent(&delta, &half).unwrap();
    c.close("D(Δ || R_I/2)", rep.value(), 1.0, 1e-3);
    c.check(rep.gap_certificate <= 1e-3, format!("D(Δ || R_I/2) grid gap {:.2e}", rep.gap_certificate));
    for alpha in [0.5, 2.0, 3.0] {
        let q = ChannelDivergenceQuery::replacer(delta.clone(), half.clone(), alpha, RenyiFamily::Sandwiched).unwrap();
        let rep = channel_renyi_divergence(&q).unwrap();
        c.close(&format!("D~{alpha}(Δ || R_I/2)"), rep.value(), 1.0, 1e-3);
        c.check(rep.gap_certificate <= 1e-3, format!("D~{alpha}(Δ || R_I/2) grid gap {:.2e}", rep.gap_certificate));
    }
    c.finish();
}

#[test]
fn ac6_minimax_equalities() {
    let _g = lock();
    let mut c = Criterion::new("AC6", "minimax gaps on 20 random qubit channels", 300);
    let recs = run_suite(Suite::Minimax, &seeds(20), None).unwrap();
    for check in ["theorem2-minimax", "lemma7-minimax"] {
        let sub: Vec<_> = recs.iter().filter(|r| r.check == check).cloned().collect();
        c.check(sub.len() == 20, format!("{check}: {} channels", sub.len()));
        c.records(check, &sub);
    }
    c.finish();
}

#[test]
fn ac7_adaptive_bounds() {
    let _g = lock();
    let mut c = Criterion::new("AC7", "adaptive bounds on 200 random strategies, tensor saturation", 300);
    let recs = run_suite(Suite::RenyiCb, &seeds(200), None).unwrap();
    for check in ["renyi-cb", "adaptive-nagaoka", "adaptive-nagaoka-np"] {
        let sub: Vec<_> = recs.iter().filter(|r| r.check == check).cloned().collect();
        c.check(sub.len() == 200, format!("{check}: {} strategies", sub.len()));
        c.records(check, &sub);
    }
    let mut rng = rng_from_seed(77);
    for k in 0..3 {
        let ch = random_channel_with(2, 2, 2, &mut rng);
        let spec = ReplacerSpec::new(full_support_state_with(2, &mut rng)).unwrap();
        for alpha in [1.5, 2.0] {
            let (s, _) = optimal_tensor_strategy(&ch, &spec, alpha, 1).unwrap();
            let b = renyi_cb_bound_check(&s, &ch, &spec, alpha).unwrap();
            c.close(&format!("n = 1 optimal tensor, channel {k}, α = {alpha}: lhs − rhs"), b.lhs - b.rhs, 0.0, 1e-4);
        }
    }
    c.finish();
}

#[test]
fn ac8_feedback_bounds() {
    let _g = lock();
    let mut c = Criterion::new("AC8", "feedback bound on 200 random protocols and superdense coding", 300);
    let recs = run_suite(Suite::FeedbackBound, &seeds(200), None).unwrap();
    let sub: Vec<_> = recs.iter().filter(|r| r.check == "feedback-bound").cloned().collect();
    c.check(sub.len() == 200, format!("feedback-bound: {} protocols", sub.len()));
    c.records("feedback-bound", &sub);
    let tight: Vec<_> = recs.iter().filter(|r| r.check == "superdense-tight").cloned().collect();
    c.check(!tight.is_empty(), format!("superdense coding at {} orders", tight.len()));
    c.records("superdense-tight (1e-6)", &tight);
    let bound: Vec<_> = tight.iter().map(|r| CheckRecord::bound("superdense-bound", 0, r.lhs, r.rhs, 1e-6)).collect();
    c.records("superdense-bound", &bound);
    c.finish();
}

#[test]
fn ac9_classical_stein() {
    let _g = lock();
    let mut c = Criterion::new("AC9", "exact classical Stein rate", 30);
    let (p, q, eps) = ([0.5, 0.5], [0.25, 0.75], 0.1);
    // D(p‖q) = ½ log₂(2) + ½ log₂(2/3)
    let d = 0.5 + 0.5 * (2.0f64 / 3.0).log2();
    c.close("D(p || q)", d, 0.207519, 1e-6);
    let r1 = classical_iid_stein(&p, &q, 1000, eps).unwrap().rate;
    let r4 = classical_iid_stein(&p, &q, 4000, eps).unwrap().rate;
    c.close("rate at n = 1000", r1, 0.207519, 0.05);
    c.check((r4 - d).abs() < (r1 - d).abs(), format!("|rate − D| {:.4e} (n = 1000) > {:.4e} (n = 4000)", (r1 - d).abs(), (r4 - d).abs()));
    c.finish();
}

#[test]
fn ac10_composite_bounds() {
    let _g = lock();
    let mut c = Criterion::new("AC10", "composite Stein exponent and ordered composite bounds", 300);
    let rep = composite_stein_exponent(&presets::identity(2)).unwrap();
    c.close("composite Stein (sup-inf)", rep.value(), 2.0, 1e-2);
    c.close("composite Stein (inf-sup)", rep.dual_value.map(|v| v.value()).unwrap_or(f64::NAN), 2.0, 1e-2);
    let mut worst = f64::NEG_INFINITY;
    let mut ordered = 0;
    for seed in 0..20u64 {
        let ch = random_channel(2, 2, 2, 1000 + seed);
        let r = [0.5, 1.0, 2.0, 3.0][(seed % 4) as usize];
        let b = composite_sc_bounds(&ch, r).unwrap();
        let excess = b.lower.value() - b.upper.value();
        worst = worst.max(excess);
        if excess <= 1e-6 {
            ordered += 1;
        }
    }
    c.check(ordered == 20, format!("lower ≤ upper + 1e-6 on {ordered}/20 channels (largest excess {worst:.2e})"));
    c.finish();
}
